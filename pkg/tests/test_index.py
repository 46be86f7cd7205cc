from __future__ import annotations

import pytest

from fbms.index import (
    IndexBudget,
    minmax_parameter_floor,
    montiel_ros_lower,
    one_parameter_sweepout_possible,
    partition_catalog,
    theorem_bounds,
    topological_translation,
)
from fbms.topology import stacking_topology


def _by_kind(N, m):
    return {rc.kind: rc for rc in partition_catalog(N, m)}


def test_catalog_examples():
    cat = _by_kind(4, 8)
    assert (cat["catenoid"].count, cat["disc"].count, cat["intermediate"].count) == (24, 4, 4)
    assert (cat["catenoid"].orbit_count, cat["disc"].orbit_count, cat["intermediate"].orbit_count) == (2, 2, 2)
    cat = _by_kind(5, 8)
    assert cat["catenoid"].count == 32
    assert (cat["catenoid"].orbit_count, cat["disc"].orbit_count, cat["intermediate"].orbit_count) == (2, 3, 3)
    cat = _by_kind(2, 11)
    assert (cat["catenoid"].count, cat["disc"].count, cat["intermediate"].count) == (11, 2, 2)


def test_lower_bound_examples():
    assert montiel_ros_lower(partition_catalog(3, 100)) == 200
    b = theorem_bounds(2, 10)
    assert b.notes["montiel_ros_lower"] == 10 and b.lower == 20
    assert theorem_bounds(7, 9).equiv_lower == 3


def test_upper_bound_examples():
    assert theorem_bounds(3, 100).upper_ind_plus_nul == 1203
    assert theorem_bounds(4, 17).equiv_upper == 7
    assert theorem_bounds(5, 17).equiv_upper == 8


def test_full_budget_examples():
    b = theorem_bounds(2, 10)
    assert (b.lower, b.upper_ind_plus_nul, b.equiv_lower, b.equiv_upper) == (20, 72, 1, 3)
    b = theorem_bounds(5, 100)
    assert (b.lower, b.upper_ind_plus_nul, b.equiv_lower, b.equiv_upper) == (400, 2205, 2, 8)


def test_topological_translation_example():
    t = topological_translation(4, 8)
    assert t["lower_form"] == 24 == t["N_minus_chi"] == 4 - (-20)
    assert t["lower_identity"] and t["upper_identity"]


def test_upper_forms_by_substitution():
    # independent algebra: substitute the closed-form genus and boundary count
    for N in range(2, 9):
        for m in range(3, 51):
            t = stacking_topology(N, m)
            g, b = t.genus, t.boundary_components
            closed = m * (5 * N - 3) + N
            if N % 2 == 0:
                assert 10 * g + 7 * b + 6 * (N - 1) - 4 == closed
            else:
                assert 10 * g + b + 6 * (N - 1) + 2 * m == closed


def test_accounting_decomposition_and_orbits():
    for N in range(2, 9):
        for m in (3, 10, 50):
            b = theorem_bounds(N, m)
            terms = b.notes["upper_terms"]
            assert (terms["catenoid"], terms["disc"], terms["intermediate"]) == (3 * m * (N - 1), N, 2 * m * N)
            assert b.lower <= b.upper_ind_plus_nul
            for rc in partition_catalog(N, m):
                assert sum(rc.orbit_sizes) == rc.count


def test_minmax_floor_examples():
    assert [minmax_parameter_floor(N) for N in (2, 3, 4)] == [1, 1, 2]
    assert one_parameter_sweepout_possible(3) and not one_parameter_sweepout_possible(4)


def test_budget_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        IndexBudget(2, 10, lower=5, upper_ind_plus_nul=4, equiv_lower=0, equiv_upper=1)
    with pytest.raises(ValueError):
        theorem_bounds(1, 10)
