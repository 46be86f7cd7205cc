from __future__ import annotations

import math

import numpy as np
import pytest

from fbms.balance import (
    MTooSmallError,
    StackingParams,
    closed_form_waist_ratios,
    coker_map,
    derived_parameters,
    in_mirror_class,
    limiting_waist_ratios,
    mirror_project,
    path_adjacency,
    predicted_forces,
)


def test_mirror_project_examples():
    assert np.allclose(mirror_project([1, 2, 3], +1), [2, 2, 2])
    assert np.allclose(mirror_project([1, 0, -1], -1), [1, 0, -1])
    v = np.random.default_rng(0).normal(size=7)
    assert np.allclose(mirror_project(v, +1) + mirror_project(v, -1), v)


def test_waist_ratio_examples():
    x, lam = limiting_waist_ratios(3)
    assert np.allclose(x, [1, 1]) and lam == pytest.approx(1.0)
    x, lam = limiting_waist_ratios(4)
    assert np.allclose(x, [math.sqrt(2) / 2, 1, math.sqrt(2) / 2]) and lam == pytest.approx(math.sqrt(2))
    x, lam = limiting_waist_ratios(5)
    assert x[0] == pytest.approx(2 * math.cos(math.pi / 5) - 1, abs=1e-7)
    assert x[0] == pytest.approx(0.6180340, abs=1e-7)
    assert lam == pytest.approx(2 * math.cos(math.pi / 5))


def test_waist_ratios_against_eigendecomposition():
    # independent oracle: dense symmetric eigensolver
    for N in range(2, 13):
        w, v = np.linalg.eigh(path_adjacency(N - 1))
        perron = np.abs(v[:, -1])
        x, lam = limiting_waist_ratios(N)
        assert lam == pytest.approx(w[-1], abs=1e-12)
        assert np.allclose(x, perron / perron[N // 2 - 1], atol=1e-12)
        assert lam < 2


def test_perron_vector_is_the_only_positive_balanced_vector():
    for N in range(3, 7):
        B = path_adjacency(N - 1)
        w, v = np.linalg.eigh(B)
        x, lam = limiting_waist_ratios(N)
        for k in range(len(w) - 1):
            y = x + 0.5 * v[:, k]
            balanced = np.allclose(B @ y, lam * y, atol=1e-10)
            assert not (balanced and np.all(y > 0))


def test_derived_parameters_example_n2_m10():
    d = derived_parameters(StackingParams(2, 10))
    taubar = math.exp(-5) / 10
    assert d.taubar[0] == pytest.approx(taubar, rel=1e-14)
    assert taubar == pytest.approx(6.7379e-4, rel=1e-4)
    assert d.hK[0] == 0.0
    hb = -taubar * math.acosh(1 / (10 * taubar))
    assert d.hB[0] == pytest.approx(hb, rel=1e-12)
    assert d.hB[0] == pytest.approx(-3.836e-3, rel=1e-3)
    assert d.hB[1] == pytest.approx(-hb, rel=1e-12)


def test_even_anchor_and_zero_dislocations():
    for N in (2, 4, 6):
        d = derived_parameters(StackingParams(N, 30))
        assert d.hK[N // 2 - 1] == 0.0
        assert np.all(d.disloc == 0.0)
        assert d.matching_residual < 1e-15


def test_negating_xi_negates_heights_and_dislocations():
    N, m = 5, 40
    zeta = mirror_project(np.array([0.3, -0.2, -0.2, 0.3]), +1)
    xi = mirror_project(np.array([0.4, 0.1, -0.1, -0.4]), -1)
    a = derived_parameters(StackingParams(N, m, zeta, xi))
    b = derived_parameters(StackingParams(N, m, zeta, -xi))
    assert np.array_equal(a.disloc, -b.disloc)
    # heights are the xi-free chain plus a part linear in the dislocations; that part flips sign
    base = derived_parameters(StackingParams(N, m, zeta, None))
    for name in ("hK", "hB"):
        plus = getattr(a, name) - getattr(base, name)
        minus = getattr(b, name) - getattr(base, name)
        assert np.any(plus != 0)
        assert np.allclose(plus, -minus, rtol=0, atol=1e-16)


def test_coker_map_dimensions():
    P2 = coker_map(2)
    assert P2.matrix.shape == (1, 1)
    P4 = coker_map(4)
    assert P4.matrix.shape == (3, 3)
    assert np.isfinite(P4.condition)
    fp, dp = P4.apply(np.zeros(3), np.zeros(3))
    assert np.all(fp == 0) and np.all(dp == 0)


def test_coker_residual_bounded_in_m():
    rng = np.random.default_rng(0)
    for N in (3, 4, 5):
        cm = coker_map(N)
        zeta = mirror_project(rng.uniform(-1, 1, N - 1), +1)
        xi = mirror_project(rng.uniform(-1, 1, N - 1), -1)
        norms = []
        for m in (30, 60, 120):
            d = derived_parameters(StackingParams(N, m, zeta, xi))
            d0 = derived_parameters(StackingParams(N, m))
            F, _ = predicted_forces(d)
            F0, _ = predicted_forces(d0)
            fp, dp = cm.apply(zeta, xi)
            tn = d.tau[d.n - 1]
            norms.append(np.linalg.norm((F - F0) / tn - fp) + np.linalg.norm(d.disloc / tn - dp))
        assert max(norms) < 1.2 * min(norms)


def test_predicted_forces_example():
    d = derived_parameters(StackingParams(2, 10))
    F, Ftilde = predicted_forces(d)
    assert F[0] / d.tau[0] == pytest.approx(-2 * math.pi * math.log(2), rel=1e-3)
    assert in_mirror_class(F, -1)
    bounded = [np.max(np.abs(predicted_forces(derived_parameters(StackingParams(2, m)))[1])) for m in (20, 40, 80)]
    assert max(bounded) < 10.0


def test_closed_form_oracle_n2():
    x, lam = closed_form_waist_ratios(2)
    assert np.allclose(x, [1.0]) and abs(lam) < 1e-15


def test_invalid_parameters():
    with pytest.raises(ValueError):
        StackingParams(1, 10)
    with pytest.raises(ValueError):
        StackingParams(3, 10, zeta=[1.0, -1.0])
    with pytest.raises(MTooSmallError):
        derived_parameters(StackingParams(8, 3, zeta=[3, 3, 3, 3, 3, 3, 3]))
