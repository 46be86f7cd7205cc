"""Montiel-Ros style index accounting for N-layer stackings.

A stacking is partitioned into (N-1)m catenoidal regions, N disc regions and
N intermediate bands.  Each region carries a Dirichlet lower bound on its index
and a Neumann upper bound on index plus nullity; under the symmetry group the
regions fall into orbits, and the equivariant bounds are counted per orbit.
The per-region numbers are catalog constants; the spectra module checks the
model problems behind them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import stacking_topology

__all__ = [
    "RegionClass",
    "IndexBudget",
    "partition_catalog",
    "montiel_ros_lower",
    "montiel_ros_upper",
    "equivariant_lower",
    "equivariant_upper",
    "symmetry_lower",
    "theorem_bounds",
    "topological_translation",
    "minmax_parameter_floor",
    "one_parameter_sweepout_possible",
]


@dataclass(frozen=True)
class RegionClass:
    """One kind of region with its per-region and per-orbit bounds.

    ``orbit_sizes`` lists the size of each G-orbit; ``equiv_upper`` gives the
    equivariant upper bound for each orbit in the same order.
    """

    kind: str
    count: int
    orbit_sizes: tuple[int, ...]
    dirichlet_lower: int
    neumann_upper: int
    equiv_lower: tuple[int, ...]
    equiv_upper: tuple[int, ...]
    note: str = ""

    @property
    def orbit_count(self) -> int:
        return len(self.orbit_sizes)

    def __post_init__(self) -> None:
        if sum(self.orbit_sizes) != self.count:
            raise ValueError(f"{self.kind}: orbit sizes sum to {sum(self.orbit_sizes)}, expected {self.count}")
        if len(self.equiv_lower) != self.orbit_count or len(self.equiv_upper) != self.orbit_count:
            raise ValueError(f"{self.kind}: one equivariant bound per orbit required")
        values = (self.dirichlet_lower, self.neumann_upper, *self.equiv_lower, *self.equiv_upper)
        if min(values) < 0:
            raise ValueError(f"{self.kind}: bounds must be nonnegative")


@dataclass(frozen=True)
class IndexBudget:
    N: int
    m: int
    lower: int
    upper_ind_plus_nul: int
    equiv_lower: int
    equiv_upper: int
    notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lower > self.upper_ind_plus_nul:
            raise ValueError("absolute lower bound exceeds upper bound")
        if self.equiv_lower > self.equiv_upper:
            raise ValueError("equivariant lower bound exceeds upper bound")


def _check(N: int, m: int) -> None:
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    if m < 3:
        raise ValueError(f"need m >= 3, got {m}")


def _layer_orbits(count: int, unit: int) -> tuple[tuple[int, ...], int | None]:
    """Orbits of `count` layers under the mirror i -> count + 1 - i, each layer of size `unit`.

    Returns the orbit sizes (paired layers first) and the position of the
    self-paired middle orbit if there is one.
    """
    pairs = count // 2
    sizes = [2 * unit] * pairs
    middle = None
    if count % 2:
        sizes.append(unit)
        middle = pairs
    return tuple(sizes), middle


def partition_catalog(N: int, m: int) -> list[RegionClass]:
    _check(N, m)
    # catenoidal regions: N-1 layers of m each
    cat_sizes, cat_mid = _layer_orbits(N - 1, m)
    cat_upper = [2] * len(cat_sizes)
    if cat_mid is not None:
        cat_upper[cat_mid] = 1
    # discs and intermediate bands: one per layer
    lay_sizes, lay_mid = _layer_orbits(N, 1)
    lay_upper = [1] * len(lay_sizes)
    if lay_mid is not None:
        lay_upper[lay_mid] = 0
    return [
        RegionClass(
            "catenoid",
            (N - 1) * m,
            cat_sizes,
            dirichlet_lower=1,
            neumann_upper=3,
            equiv_lower=(1,) * len(cat_sizes),
            equiv_upper=tuple(cat_upper),
            note="Dirichlet index >= 1, Neumann index+nullity <= 3; equivariant <= 2, self-paired middle <= 1",
        ),
        RegionClass(
            "disc",
            N,
            lay_sizes,
            dirichlet_lower=0,
            neumann_upper=1,
            equiv_lower=(0,) * len(lay_sizes),
            equiv_upper=tuple(lay_upper),
            note="Neumann index+nullity <= 1; self-paired middle disc contributes 0",
        ),
        RegionClass(
            "intermediate",
            N,
            lay_sizes,
            dirichlet_lower=0,
            neumann_upper=2 * m,
            equiv_lower=(0,) * len(lay_sizes),
            equiv_upper=tuple(lay_upper),
            note="Neumann index+nullity <= 2m; equivariant <= 1, self-paired middle 0",
        ),
    ]


def montiel_ros_lower(catalog: list[RegionClass]) -> int:
    return sum(rc.count * rc.dirichlet_lower for rc in catalog)


def montiel_ros_upper(catalog: list[RegionClass]) -> int:
    return sum(rc.count * rc.neumann_upper for rc in catalog)


def equivariant_lower(catalog: list[RegionClass]) -> int:
    return sum(sum(rc.equiv_lower) for rc in catalog)


def equivariant_upper(catalog: list[RegionClass]) -> int:
    return sum(sum(rc.equiv_upper) for rc in catalog)


def symmetry_lower(N: int, m: int) -> int:
    """Lower bound from the pyramidal symmetry alone: 2m for even N, 2m - 1 for odd N."""
    return 2 * m if N % 2 == 0 else 2 * m - 1


def theorem_bounds(N: int, m: int) -> IndexBudget:
    catalog = partition_catalog(N, m)
    by_kind = {rc.kind: rc for rc in catalog}
    mr_lower = montiel_ros_lower(catalog)
    sym_lower = symmetry_lower(N, m)
    return IndexBudget(
        N=N,
        m=m,
        lower=max(mr_lower, sym_lower),
        upper_ind_plus_nul=montiel_ros_upper(catalog),
        equiv_lower=equivariant_lower(catalog),
        equiv_upper=equivariant_upper(catalog),
        notes={
            "montiel_ros_lower": mr_lower,
            "symmetry_lower": sym_lower,
            "upper_terms": {k: rc.count * rc.neumann_upper for k, rc in by_kind.items()},
            "equiv_upper_terms": {k: sum(rc.equiv_upper) for k, rc in by_kind.items()},
            "orbit_counts": {k: rc.orbit_count for k, rc in by_kind.items()},
        },
    )


def topological_translation(N: int, m: int) -> dict:
    """Rewrite the bounds in terms of genus and boundary count, checking the identities."""
    topo = stacking_topology(N, m)
    g, b, chi = topo.genus, topo.boundary_components, topo.euler_char
    budget = theorem_bounds(N, m)
    lower_form = 2 * g + b + N - 2
    if N % 2 == 0:
        upper_form = 10 * g + 7 * b + 6 * (N - 1) - 4
    else:
        upper_form = 10 * g + b + 6 * (N - 1) + 2 * m
    mr_lower = budget.notes["montiel_ros_lower"]
    return {
        "N": N,
        "m": m,
        "genus": g,
        "boundary": b,
        "euler_char": chi,
        "lower_form": lower_form,
        "N_minus_chi": N - chi,
        "upper_form": upper_form,
        "lower_identity": lower_form == N - chi == mr_lower,
        "upper_identity": upper_form == budget.upper_ind_plus_nul,
    }


def minmax_parameter_floor(N: int) -> int:
    """Least number of sweepout parameters compatible with the equivariant index lower bound."""
    return N // 2


def one_parameter_sweepout_possible(N: int) -> bool:
    return minmax_parameter_floor(N) <= 1
