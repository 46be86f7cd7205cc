from __future__ import annotations

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbms.balance import in_mirror_class, limiting_waist_ratios, mirror_project
from fbms.index import theorem_bounds
from fbms.spectra import spectral_shift_bound
from fbms.surface import cutoff, phi_inverse, phi_map
from fbms.symgroup import KINDS, standard_group
from fbms.topology import build_combinatorial_stacking, combinatorial_topology, euler_characteristic, stacking_topology

finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.integers(1, 10), st.integers(3, 16))
@settings(max_examples=60, deadline=None)
def test_topology_identities(N, m):
    topo = stacking_topology(N, m)
    comb = build_combinatorial_stacking(N, m)
    chi = euler_characteristic(comb)
    assert chi == 2 - 2 * topo.genus - topo.boundary_components == m - (m - 1) * N
    assert combinatorial_topology(comb) == topo
    assert 8 * topo.genus + 4 * topo.boundary_components - 8 == 4 * (m - 1) * N - 4 * m


@given(arrays(float, st.integers(1, 12), elements=finite), st.sampled_from([1, -1]))
def test_mirror_projection_decomposes(v, sign):
    p = mirror_project(v, sign)
    q = mirror_project(v, -sign)
    scale = max(1.0, float(np.max(np.abs(v))))
    assert np.allclose(p + q, v, atol=1e-12 * scale)
    assert in_mirror_class(p, sign, 1e-12)
    assert np.allclose(mirror_project(p, sign), p, atol=1e-12 * scale)
    assert abs(float(p @ q)) <= 1e-9 * scale**2 * len(v)


@given(st.integers(2, 8), st.integers(3, 50))
def test_index_lower_bound_below_upper(N, m):
    b = theorem_bounds(N, m)
    assert 0 <= b.lower <= b.upper_ind_plus_nul
    assert 0 <= b.equiv_lower <= b.equiv_upper


@given(st.floats(-10, 10, allow_nan=False))
def test_cutoff_is_a_step_in_the_unit_interval(x):
    value = cutoff(x)
    assert 0.0 <= value <= 1.0
    if x <= 1:
        assert value == 1.0
    if x >= 2:
        assert value == 0.0


@given(st.floats(1.0, 1.999), st.floats(1e-6, 0.5))
def test_cutoff_is_nonincreasing(x, dx):
    assert cutoff(min(x + dx, 2.0)) <= cutoff(x) + 1e-15


@given(st.floats(0, 1 / 3), st.floats(-math.pi + 1e-9, math.pi), st.floats(-math.pi / 4, math.pi / 4))
def test_phi_round_trip(sigma, theta, omega):
    s, t, w = phi_inverse(phi_map(sigma, theta, omega))
    assert abs(float(np.squeeze(s)) - sigma) < 1e-12
    assert abs(float(np.squeeze(w)) - omega) < 1e-12
    gap = (float(np.squeeze(t)) - theta + math.pi) % (2 * math.pi) - math.pi
    assert abs(gap) < 1e-9


@given(st.sampled_from(KINDS), st.integers(2, 9))
@settings(max_examples=30, deadline=None)
def test_group_elements_are_orthogonal(kind, m):
    group = standard_group(kind, m)
    for g in group.elements:
        assert np.allclose(g.matrix @ g.matrix.T, np.eye(3), atol=1e-12)
        assert g.det in (1, -1)


@given(st.integers(2, 12))
@settings(max_examples=11, deadline=None)
def test_waist_ratios_positive_and_symmetric(N):
    x, lam = limiting_waist_ratios(N)
    assert np.all(x > 0)
    assert np.allclose(x, x[::-1], atol=1e-12)
    assert lam < 2


@given(
    arrays(float, (4, 2, 2), elements=st.floats(-0.3, 0.3, allow_nan=False)),
    arrays(float, 4, elements=st.floats(-5, 5, allow_nan=False)),
    st.floats(-5, 5, allow_nan=False),
)
def test_shift_bound_is_exact_for_identical_data(perturb, q, lam_k):
    g = np.eye(2) + 0.5 * (perturb + perturb.transpose(0, 2, 1))
    data = {"g": g, "q": q, "r": np.zeros(3)}
    assert spectral_shift_bound(data, data, lam_k, C_tr=2.0)["bound"] == lam_k
