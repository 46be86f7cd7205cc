from __future__ import annotations

import pytest

from fbms.topology import (
    CombSurface,
    InapplicableError,
    UnsupportedParameterError,
    build_combinatorial_stacking,
    combinatorial_topology,
    euler_characteristic,
    max_symmetry_certificate,
    polymorphism_family,
    stacking_topology,
    umbilic_budget,
)


def test_stacking_topology_examples():
    assert (stacking_topology(4, 8).genus, stacking_topology(4, 8).boundary_components) == (7, 8)
    assert (stacking_topology(5, 8).genus, stacking_topology(5, 8).boundary_components) == (14, 1)
    for m in (3, 9):
        assert (stacking_topology(1, m).genus, stacking_topology(1, m).boundary_components) == (0, 1)


def test_euler_characteristic_examples():
    # chi = m - (m - 1) N; the (2, 3) value is -1 (see the decisions ledger)
    assert euler_characteristic(build_combinatorial_stacking(2, 3)) == -1
    assert euler_characteristic(build_combinatorial_stacking(1, 5)) == 1
    assert euler_characteristic(build_combinatorial_stacking(5, 8)) == -27 == 2 - 2 * 14 - 1
    assert euler_characteristic(build_combinatorial_stacking(4, 8)) == -20 == 2 - 2 * 7 - 8


def test_disc_and_annulus_complexes():
    disc = CombSurface(3, [(0, 1), (1, 2), (2, 0)], [[0, 1, 2]])
    assert euler_characteristic(disc) == 1
    # annulus: two triangles' worth of quads glued around a band of 3 squares
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]
    faces = [[0, 7, 3, 6], [1, 8, 4, 7], [2, 6, 5, 8]]
    annulus = CombSurface(6, edges, faces)
    assert euler_characteristic(annulus) == 0


def test_combinatorial_matches_closed_form():
    for N in range(1, 7):
        for m in range(3, 9):
            assert combinatorial_topology(build_combinatorial_stacking(N, m)) == stacking_topology(N, m)


def test_umbilic_budget_examples():
    assert umbilic_budget(7, 8) == 80
    assert umbilic_budget(0, 2) == 0
    with pytest.raises(InapplicableError):
        umbilic_budget(0, 1)
    for N in range(2, 9):
        for m in range(3, 13):
            t = stacking_topology(N, m)
            assert umbilic_budget(t.genus, t.boundary_components) == 4 * (m - 1) * N - 4 * m


def test_max_symmetry_certificate_examples():
    assert max_symmetry_certificate(4, 8)["extra_symmetry_excluded"]
    cert = max_symmetry_certificate(2, 3)
    # budget 4 against 16 (the stated -4 < 8 is an arithmetic slip; see the ledger)
    assert (cert["budget"], cert["required_if_axis_preserved"]) == (4, 16)
    assert cert["extra_symmetry_excluded"]
    cert = max_symmetry_certificate(3, 3)
    assert cert["extra_symmetry_excluded"]
    assert cert["axis_point_order_if_axis_preserved"] == 2 * 3 - 2 == 4


def test_polymorphism_family_examples():
    (one,) = polymorphism_family(1)
    q = one["q"]
    assert (one["N"], one["m"], one["genus"]) == (7, 1 + q, 3 * q)
    two = polymorphism_family(2)
    assert [f["N"] for f in two] == [7, 11]
    assert two[0]["genus"] == two[1]["genus"] == two[0]["q"] * 15
    for fam in (one, *two, *polymorphism_family(4)):
        t = stacking_topology(fam["N"], fam["m"])
        assert (t.genus, t.boundary_components) == (fam["genus"], 1)
    orders = [f["group_order"] for f in polymorphism_family(4)]
    assert len(set(orders)) == len(orders)


def test_bad_parameters():
    with pytest.raises(UnsupportedParameterError):
        stacking_topology(0, 5)
    with pytest.raises(UnsupportedParameterError):
        build_combinatorial_stacking(2, 2)
