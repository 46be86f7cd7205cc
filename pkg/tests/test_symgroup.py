from __future__ import annotations

import numpy as np
import pytest

from fbms.symgroup import (
    NonFiniteGroupError,
    character_from_generators,
    character_from_normals,
    generate_group,
    normal_sign,
    orbit_permutations,
    project_equivariant,
    reflection,
    rotation,
    stacking_group,
    standard_generators,
    standard_group,
)

UP = np.array([0.0, 0.0, 1.0])


def test_prismatic_order():
    assert standard_group("prismatic", 8).order == 32


def test_cyclic_one_is_trivial():
    g = standard_group("cyclic", 1)
    assert g.order == 1
    assert np.allclose(g.elements[0].matrix, np.eye(3))


def test_antiprismatic_closure_by_exhaustive_composition():
    g = standard_group("antiprismatic", 3)
    assert g.order == 12
    for a in g.elements:
        for b in g.elements:
            assert g.contains(a.matrix @ b.matrix)


def test_generate_identity_and_rotation():
    assert generate_group([rotation(UP, 0.0)]).order == 1
    assert generate_group([rotation(UP, 2 * np.pi / 5)]).order == 5


def test_generators_reproduce_standard_group():
    for m in (3, 4, 7):
        gen = generate_group(standard_generators("prismatic", m))
        assert gen.same_elements(standard_group("prismatic", m))


def test_irrational_rotation_hits_cap():
    with pytest.raises(NonFiniteGroupError):
        generate_group([rotation(UP, 1.0)], cap=50)


def test_normal_sign_rotation_and_reflection():
    flat = lambda p: UP  # noqa: E731
    assert normal_sign(rotation(UP, 0.7), [0.3, 0.1, 0.0], UP, flat) == 1
    assert normal_sign(reflection(UP), [0.3, 0.1, 0.0], UP, flat) == -1


def test_stacking_groups_preserve_the_ball():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(200, 3))
    for N, m in ((2, 5), (3, 4), (6, 3)):
        for g in stacking_group(N, m).elements:
            assert np.allclose(np.linalg.norm(g.apply(p), axis=1), np.linalg.norm(p, axis=1), atol=1e-12)


def _orbit(group, seeds):
    pts = np.concatenate([g.apply(seeds) for g in group.elements])
    _, keep = np.unique(np.round(pts, 9), axis=0, return_index=True)
    return pts[np.sort(keep)]


def test_projection_examples():
    group = standard_group("prismatic", 3)
    rng = np.random.default_rng(1)
    pts = _orbit(group, rng.normal(size=(4, 3)))
    ones = np.ones(len(pts))
    assert np.allclose(project_equivariant(ones, pts, group), 1.0)
    # the character odd under z-reflection kills functions even in z
    chi = character_from_generators(group, [1, 1, -1])
    assert chi.is_homomorphism()
    even = pts[:, 2] ** 2
    assert np.allclose(project_equivariant(even, pts, group, chi), 0.0, atol=1e-12)


def test_projection_is_idempotent():
    group = standard_group("antiprismatic", 4)
    rng = np.random.default_rng(2)
    pts = _orbit(group, rng.normal(size=(5, 3)))
    vals = rng.normal(size=len(pts))
    chi = character_from_generators(group, [1, -1, 1])
    once = project_equivariant(vals, pts, group, chi)
    assert np.allclose(project_equivariant(once, pts, group, chi), once, atol=1e-12)


def test_orbit_permutations_identity_first_row():
    group = standard_group("pyramidal", 5)
    pts = _orbit(group, np.array([[0.3, 0.2, 0.1]]))
    perms = orbit_permutations(pts, group)
    ident = group.index_of(np.eye(3))
    assert np.array_equal(perms[ident], np.arange(len(pts)))


def test_character_from_normals_on_antiprismatic_mesh():
    from fbms.balance import StackingParams
    from fbms.surface import assemble_surface

    mesh = assemble_surface(StackingParams(3, 4), resolution=1 / 12)
    group = stacking_group(3, 4)
    rng = np.random.default_rng(3)
    interior = np.nonzero(~mesh.labels["boundary"] & (mesh.labels["kind"] == "flat-disc"))[0]
    pick = rng.choice(interior, 100, replace=False)
    from scipy.spatial import cKDTree

    tree = cKDTree(mesh.vertices)
    normal_at = lambda q: mesh.normals[tree.query(q)[1]]  # noqa: E731
    chi = character_from_normals(group, mesh.vertices[pick], mesh.normals[pick], normal_at)
    assert chi.is_homomorphism()
    flip = group.index_of(rotation((1.0, 0.0, 0.0), np.pi).matrix)
    assert chi(flip) in (-1, 1)
