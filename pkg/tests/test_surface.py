from __future__ import annotations

import math

import numpy as np
import pytest

from fbms.balance import StackingParams, derived_parameters
from fbms.geometry import vertical_forces
from fbms.surface import (
    DomainError,
    RefinementError,
    SurfaceMesh,
    assemble_surface,
    cokernel_w,
    conormal_audit,
    cutoff,
    default_resolution,
    export_obj,
    export_report,
    height_function,
    height_jet,
    height_value,
    kappa_chart,
    layer_specs,
    orbit_audit,
    phi_inverse,
    phi_map,
    read_obj,
    rho_weight,
    self_intersections,
    varpi_chart,
)
from fbms.symgroup import character_from_normals, project_equivariant, stacking_group


@pytest.fixture(scope="module")
def mesh_2_10() -> SurfaceMesh:
    return assemble_surface(StackingParams(2, 10))


@pytest.fixture(scope="module")
def mesh_3_8() -> SurfaceMesh:
    return assemble_surface(StackingParams(3, 8))


def test_phi_examples():
    assert np.allclose(phi_map(0.0, 0.0, 0.0), [1, 0, 0])
    assert np.allclose(phi_map(1 / 3, 0.0, 0.0), [2 / 3, 0, 0])


def test_phi_round_trip():
    rng = np.random.default_rng(0)
    s = rng.uniform(0, 1 / 3, 10_000)
    t = rng.uniform(-math.pi, math.pi, 10_000)
    w = rng.uniform(-math.pi / 4, math.pi / 4, 10_000)
    back = phi_inverse(phi_map(s, t, w))
    assert max(np.max(np.abs(back[0] - s)), np.max(np.abs(back[1] - t)), np.max(np.abs(back[2] - w))) < 1e-12


def test_phi_domain():
    with pytest.raises(DomainError):
        phi_map(0.5, 0.0, 0.0)


def test_cutoff_examples():
    assert cutoff(0.5) == 1.0
    assert cutoff(3.0) == 0.0
    v = cutoff(1.5)
    assert 0 < v < 1
    h = 1e-4
    fd1 = (cutoff(1.5 + h) - cutoff(1.5 - h)) / (2 * h)
    fd2 = (cutoff(1.5 + h) - 2 * v + cutoff(1.5 - h)) / h**2
    assert cutoff(1.5, 1) == pytest.approx(fd1, abs=1e-6)
    assert cutoff(1.5, 2) == pytest.approx(fd2, abs=1e-6)


def test_height_examples():
    d = derived_parameters(StackingParams(3, 12))
    m = d.m
    for spec in layer_specs(d):
        far = height_function(spec, 1 / 3, 0.01)
        assert far == pytest.approx(math.asin(spec.h_B / (2 / 3)), abs=1e-15)
        for b in spec.bridges:
            theta = b.side * (math.pi / (2 * m) - b.tau)
            # arcosh(1 + e) ~ sqrt(2e): rounding in the distance costs about 1e-7 tau
            assert height_function(spec, 0.0, theta) == pytest.approx(b.h_K, abs=5e-7 * b.tau)


def test_mid_blend_is_a_convex_combination():
    d = derived_parameters(StackingParams(2, 12))
    m = d.m
    sigma, theta = 1.5 / m, math.pi / (4 * m)
    for spec in layer_specs(d):
        (b,) = spec.bridges
        dist = math.hypot(sigma, theta - b.side * math.pi / (2 * m))
        direction = 1.0 if spec.h_B > b.h_K else -1.0
        catenoid = b.h_K + direction * b.tau * math.acosh(dist / b.tau)
        cone = math.asin(spec.h_B / (1 - sigma))
        v = height_function(spec, sigma, theta)
        lo, hi = min(spec.h_B, catenoid, cone), max(spec.h_B, catenoid, cone)
        assert lo <= v <= hi
        assert min(abs(v - spec.h_B), abs(v - catenoid)) > 0


def test_height_jet_matches_finite_differences():
    d = derived_parameters(StackingParams(3, 10))
    spec = layer_specs(d)[1]
    s = np.array([0.12, 0.2, 0.25])
    t = np.array([0.03, -0.05, 0.1])
    jet = height_jet(spec, s, t)
    h = 1e-6
    ds = (height_value(spec, s + h, t) - height_value(spec, s - h, t)).real / (2 * h)
    dt = (height_value(spec, s, t + h) - height_value(spec, s, t - h)).real / (2 * h)
    assert np.allclose(jet.g[..., 0], ds, atol=1e-7)
    assert np.allclose(jet.g[..., 1], dt, atol=1e-7)


def test_height_rejects_perforation():
    d = derived_parameters(StackingParams(2, 10))
    spec = layer_specs(d)[0]
    b = spec.bridges[0]
    with pytest.raises(DomainError):
        height_jet(spec, np.array([0.0]), np.array([b.side * math.pi / 20 - 0.5 * b.tau]))


def test_mesh_2_10_structure(mesh_2_10):
    assert set(np.unique(mesh_2_10.labels["layer"])) == {1, 2}
    bd = mesh_2_10.labels["boundary"]
    assert bd.sum() > 0
    assert np.max(np.abs(np.linalg.norm(mesh_2_10.vertices[bd], axis=1) - 1)) < 1e-9
    assert np.all(np.linalg.norm(mesh_2_10.vertices, axis=1) <= 1 + 1e-12)
    assert mesh_2_10.waists_welded == mesh_2_10.waists_expected == 10
    assert np.allclose(np.linalg.norm(mesh_2_10.normals, axis=1), 1.0)


def test_mesh_is_a_surface(mesh_2_10, mesh_3_8):
    for mesh in (mesh_2_10, mesh_3_8):
        counts = mesh.edge_face_counts()
        assert set(np.unique(counts)) <= {1, 2}
        chi = mesh.n_vertices - len(counts) + len(mesh.faces)
        assert chi == mesh.m - (mesh.m - 1) * mesh.N


def test_adjacent_catenoid_axes_differ_by_pi_over_m(mesh_3_8):
    lab = mesh_3_8.labels
    m = mesh_3_8.m
    waist = lab["ring"] == 0
    slots = {}
    for i in (1, 2):
        P = mesh_3_8.vertices[waist & (lab["catenoid"] == i)]
        az = np.arctan2(P[:, 1], P[:, 0])
        k = np.rint((az - math.pi / (2 * m)) / (math.pi / m)).astype(int) % (2 * m)
        slots[i] = set(k.tolist())
        assert len(slots[i]) == m
    assert {k % 2 for k in slots[1]} != {k % 2 for k in slots[2]}
    assert {(k + 1) % (2 * m) for k in slots[1]} == slots[2]


def test_disc_radius(mesh_3_8):
    lab = mesh_3_8.labels
    for spec in mesh_3_8.specs:
        rim = (lab["layer"] == spec.index) & np.isclose(lab["sigma"], 1 / 3, rtol=0, atol=1e-15)
        P = mesh_3_8.vertices[rim]
        assert len(P) > 0
        expected = (2 / 3) * math.sqrt(1 - (1.5 * spec.h_B) ** 2)
        assert np.allclose(np.hypot(P[:, 0], P[:, 1]), expected, rtol=0, atol=1e-15)
        assert np.allclose(P[:, 2], spec.h_B, rtol=0, atol=1e-15)


def test_rho_examples(mesh_2_10):
    lab = mesh_2_10.labels
    d = mesh_2_10.derived
    waist = lab["ring"] == 0
    assert np.allclose(lab["rho"][waist], 1 / d.tau[0], rtol=1e-9)
    flat = lab["kind"] == "flat-disc"
    assert np.all(lab["rho"][flat] == mesh_2_10.m)
    inK = lab["in_K"].astype(bool)
    t = lab["t"][inK]
    assert np.allclose(lab["rho"][inK], 1 / (d.tau[0] * np.cosh(t)), rtol=1e-9)
    assert rho_weight(np.array([np.inf]), 10)[0] == 10


def test_kappa_waist_distance():
    d = derived_parameters(StackingParams(3, 16))
    for i in (1, 2):
        s, th, w = kappa_chart(i, 0.0, 0.0, d, ambient=False)
        corner = (-1) ** (i - 1) * math.pi / (2 * d.m)
        assert math.hypot(s, th - corner) == pytest.approx(d.tau[i - 1], rel=1e-14)
        assert w == d.hK[i - 1]
    with pytest.raises(DomainError):
        kappa_chart(3, 0.0, 0.0, d)


def test_varpi_examples():
    assert np.allclose(varpi_chart(np.array([0.5, 0.0, 0.2]), 20), [0.5, 0, 0])
    rng = np.random.default_rng(0)
    r = np.sqrt(rng.uniform(0, 1, 1000))
    a = rng.uniform(0, 2 * math.pi, 1000)
    pts = np.column_stack([r * np.cos(a), r * np.sin(a), np.zeros(1000)])
    assert np.allclose(varpi_chart(pts, 12), pts, atol=1e-15)


def test_cokernel_w_examples(mesh_3_8):
    lab = mesh_3_8.labels
    m = mesh_3_8.m
    for i in (1, 2, 3):
        w = cokernel_w(i, mesh_3_8)
        on = (lab["layer"] == i) & np.isfinite(lab["sigma"])
        plateau = on & np.isclose(lab["sigma"], 3 / m, atol=0.2 / m)
        outside = on & (np.abs(lab["sigma"] - 1 / m) < 0.2 / m)
        assert np.allclose(w[plateau], (-1) ** (i - 1))
        assert np.all(w[outside] == 0)
        assert np.all(w[lab["layer"] != i] == 0)


def test_cokernel_sum_is_equivariant_for_odd_mirror_data(mesh_2_10):
    group = stacking_group(2, 10)
    V = np.array([0.7, -0.7])
    f = sum(V[i - 1] * cokernel_w(i, mesh_2_10) for i in (1, 2))
    lab = mesh_2_10.labels
    rng = np.random.default_rng(0)
    pick = rng.choice(np.nonzero(lab["kind"] == "flat-disc")[0], 100, replace=False)
    from scipy.spatial import cKDTree

    tree = cKDTree(mesh_2_10.vertices)
    chi = character_from_normals(group, mesh_2_10.vertices[pick], mesh_2_10.normals[pick], lambda q: mesh_2_10.normals[tree.query(q)[1]])
    # the normal field f * nu is preserved exactly when f is fixed by the projection twisted by chi
    assert np.allclose(project_equivariant(f, mesh_2_10.vertices, group, chi), f, atol=1e-12)


def test_obj_round_trip(tmp_path, mesh_2_10):
    path = export_obj(mesh_2_10, tmp_path / "s.obj")
    v, n, f = read_obj(path)
    assert len(v) == mesh_2_10.n_vertices and len(f) == len(mesh_2_10.faces)
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0)
    assert (tmp_path / "s.labels.json").exists()
    assert export_report(mesh_2_10, tmp_path / "s.json").exists()


def test_empty_mesh_export_fails(tmp_path, mesh_2_10):
    empty = SurfaceMesh(**{**mesh_2_10.__dict__, "vertices": np.zeros((0, 3)), "faces": np.zeros((0, 3), int)})
    with pytest.raises(ValueError):
        export_obj(empty, tmp_path / "e.obj")


def test_bad_resolution():
    with pytest.raises(RefinementError):
        assemble_surface(StackingParams(2, 10), resolution=0.0)


def test_audits_on_small_meshes(mesh_2_10, mesh_3_8):
    for mesh in (mesh_2_10, mesh_3_8):
        res = default_resolution(mesh.m)
        assert np.max(conormal_audit(mesh)) < max(1e-6, 3 * res**2)
        assert orbit_audit(mesh) < 1e-9
    assert self_intersections(mesh_3_8) == 0


def test_self_intersection_probe_detects_a_crossing(mesh_2_10):
    # tilt layer 2 so its flat disc cuts through layer 1
    moved = mesh_2_10.vertices.copy()
    layer2 = mesh_2_10.labels["layer"] == 2
    moved[layer2, 2] -= 0.05 * moved[layer2, 0]
    crossed = SurfaceMesh(**{**mesh_2_10.__dict__, "vertices": moved})
    assert self_intersections(crossed) > 0


def test_forces_exist_for_each_layer(mesh_2_10):
    F = vertical_forces(mesh_2_10)
    assert F.shape == (2,) and F[0] == -F[1]
