from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from scipy.spatial import Delaunay

from fbms.balance import StackingParams, derived_parameters, predicted_forces
from fbms.geometry import (
    FD_STEP,
    ImmersionError,
    MeshIntegrityError,
    Chart,
    catenoid_chart,
    disc_residual,
    euclidean_catenoid_chart,
    forces_in_mirror_class,
    forms_catenoid,
    forms_disc_graph,
    forms_generic,
    graph_chart,
    mean_curvature_field,
    oracle_agreement,
    plane_chart,
    vertical_force,
    vertical_forces,
    weighted_sup_norm,
)
from fbms.surface import SurfaceMesh, assemble_surface, layer_specs


@pytest.fixture(scope="module")
def mesh_2_20() -> SurfaceMesh:
    return assemble_surface(StackingParams(2, 20))


def test_plane_is_totally_geodesic():
    rng = np.random.default_rng(0)
    f = forms_generic(plane_chart(0.3), rng.uniform(-1, 1, (50, 2)))
    assert np.max(np.abs(f.A)) < 1e-8
    assert np.max(np.abs(f.H)) < 1e-8
    assert np.allclose(f.g, np.eye(2))


def test_euclidean_catenoid_is_minimal():
    rng = np.random.default_rng(1)
    u = np.column_stack([rng.uniform(-2, 2, 100), rng.uniform(-np.pi, np.pi, 100)])
    f = forms_generic(euclidean_catenoid_chart(0.7), u)
    assert np.max(np.abs(f.H)) < 1e-6
    assert np.all(f.normA2 > 0)


def test_degenerate_chart_raises():
    flat_line = Chart(lambda u: np.stack([u[:, 0], u[:, 0], 0 * u[:, 0]], axis=1), "euclidean")
    with pytest.raises(ImmersionError):
        forms_generic(flat_line, np.zeros((3, 2)))


def test_forms_invariants():
    d = derived_parameters(StackingParams(3, 16))
    rng = np.random.default_rng(2)
    a = float(d.a[0])
    f = forms_catenoid(1, rng.uniform(-a, a, 200), rng.uniform(-1.5, 1.5, 200), d)
    assert np.allclose(f.g, f.g.transpose(0, 2, 1))
    assert np.all(np.linalg.eigvalsh(f.g) > 0)
    assert np.all(f.normA2 >= 0)
    assert np.allclose(np.linalg.norm(f.nu, axis=1), 1.0)


def test_catenoid_closed_form_matches_generic():
    d = derived_parameters(StackingParams(2, 20))
    rng = np.random.default_rng(3)
    a = float(d.a[0])
    u = np.column_stack([rng.uniform(-a, a, 100), rng.uniform(-np.pi / 2, np.pi / 2, 100)])
    closed = forms_catenoid(1, u[:, 0], u[:, 1], d)
    generic = forms_generic(catenoid_chart(1, d), u)
    scale = np.max(np.abs(closed.H))
    assert np.max(np.abs(closed.H - generic.H)) <= 1e-5
    assert np.max(np.abs(closed.H - generic.H)) <= 1e-3 * scale
    assert np.allclose(closed.nu, generic.nu, atol=1e-8)


def test_graph_closed_form_within_second_order_of_generic():
    d = derived_parameters(StackingParams(2, 20))
    out = oracle_agreement(d, n_points=100, seed=0)
    assert out["intermediate"] <= 10 * FD_STEP**2
    assert out["disc-graph"] <= 10 * FD_STEP**2


def test_constant_height_graph_matches_generic():
    d = derived_parameters(StackingParams(2, 12))
    spec = layer_specs(d)[0]
    rng = np.random.default_rng(4)
    s = rng.uniform(0.26, 1 / 3, 50)
    t = rng.uniform(-np.pi / 48, np.pi / 48, 50)
    closed = forms_disc_graph(spec, s, t)
    generic = forms_generic(graph_chart(spec), np.column_stack([s, t]))
    assert np.max(np.abs(closed.H - generic.H)) < 1e-6


def test_catenoid_metric_at_waist():
    d = derived_parameters(StackingParams(2, 20))
    tau = float(d.tau[0])
    f = forms_catenoid(1, 0.0, 0.0, d)
    rel = np.max(np.abs(f.g[0] / tau**2 - np.eye(2)))
    assert rel <= 1.0 / (2 * d.m)
    assert f.residuals["metric"][0] == pytest.approx(rel, rel=1e-6)


def test_catenoid_second_fundamental_form_at_waist():
    d = derived_parameters(StackingParams(2, 20))
    tau = float(d.tau[0])
    f = forms_catenoid(1, 0.0, 0.0, d)
    # rho = 1/tau at the waist
    assert abs(tau**2 * f.normA2[0] - 2.0) < 10 * tau


def test_second_fundamental_form_alternates_with_parity():
    d = derived_parameters(StackingParams(3, 16))
    A1 = forms_catenoid(1, 0.3, 0.2, d).A[0]
    A2 = forms_catenoid(2, 0.3, 0.2, d).A[0]
    assert np.sign(A1[0, 0]) == -np.sign(A2[0, 0])
    # the leading diagonal flips; off-diagonal terms are O(tau) and depend on the waist height
    assert np.allclose(np.diag(A1), -np.diag(A2), rtol=1e-3)


def test_flat_disc_vertices_have_zero_curvature(mesh_2_20):
    H = mean_curvature_field(mesh_2_20)["H"]
    flat = mesh_2_20.labels["kind"] == "flat-disc"
    assert np.any(flat)
    assert np.all(H[flat] == 0.0)


def test_inner_region_is_exactly_minimal(mesh_2_20):
    H = mean_curvature_field(mesh_2_20)["H"]
    inner = np.linalg.norm(mesh_2_20.vertices, axis=1) < 1 - 10 / mesh_2_20.m
    assert np.count_nonzero(inner) > 1000
    assert np.all(H[inner] == 0.0)


def test_weighted_sup_norm_examples():
    rho = np.array([1.0, 3.0, 7.0])
    assert weighted_sup_norm(np.ones(3), 0.0, rho, 10) == 1.0
    assert weighted_sup_norm(1.0 / rho, 1.0, rho, 10) == pytest.approx(0.1)
    assert weighted_sup_norm([], 1.0, [], 10) == 0.0


def test_dislocation_correction_halves_disc_residual():
    mesh = assemble_surface(StackingParams(3, 12, xi=[1.0, -1.0]))
    res = disc_residual(mesh)
    assert res["after"] * 2 <= res["before"]


def test_forces_lie_in_the_odd_mirror_class(mesh_2_20):
    F = vertical_forces(mesh_2_20)
    assert forces_in_mirror_class(F, 1e-9 * np.max(np.abs(F)))
    assert not forces_in_mirror_class(np.array([1.0, 1.0]), 1e-9)


def _flat_unit_disc(template: SurfaceMesh) -> SurfaceMesh:
    ang = np.linspace(0, 2 * np.pi, 97)[:-1]
    rings = [np.zeros((1, 2))] + [r * np.column_stack([np.cos(ang), np.sin(ang)]) for r in (0.5, 1.0)]
    xy = np.concatenate(rings)
    faces = Delaunay(xy).simplices
    n = len(xy)
    rim = np.isclose(np.hypot(xy[:, 0], xy[:, 1]), 1.0)
    labels = dict(template.labels)
    labels.update(boundary=rim, ring=np.ones(n, dtype=int), catenoid=np.zeros(n, dtype=int))
    spec = dataclasses.replace(template.specs[0], bridges=())
    return dataclasses.replace(
        template,
        vertices=np.column_stack([xy, np.zeros(n)]),
        faces=faces,
        labels=labels,
        specs=[spec],
        face_layer=np.ones(len(faces), dtype=int),
    )


def test_horizontal_disc_through_origin_has_no_vertical_force(mesh_2_20):
    disc = _flat_unit_disc(mesh_2_20)
    assert vertical_force(disc, 1) == 0.0


def test_open_boundary_loop_is_rejected(mesh_2_20):
    disc = _flat_unit_disc(mesh_2_20)
    # removing one rim triangle leaves a boundary vertex of degree four
    rim = disc.labels["boundary"]
    on_rim = np.nonzero(rim[disc.faces].sum(axis=1) == 1)[0]
    broken = dataclasses.replace(disc, faces=np.delete(disc.faces, on_rim[0], axis=0))
    broken = dataclasses.replace(broken, face_layer=np.ones(len(broken.faces), dtype=int))
    with pytest.raises(MeshIntegrityError):
        vertical_force(broken, 1)


@pytest.mark.xfail(
    strict=True,
    reason="quadrature force is about 0.56 of the leading-order prediction at m = 40; see the decisions ledger",
)
def test_force_matches_leading_order_prediction():
    mesh = assemble_surface(StackingParams(2, 40))
    F = vertical_forces(mesh)
    predicted, _ = predicted_forces(mesh.derived)
    assert abs(F[0] - predicted[0]) <= 0.2 * abs(predicted[0])
