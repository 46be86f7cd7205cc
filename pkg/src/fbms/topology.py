"""Topological invariants of N-layer disc stackings joined by m ribbons per gap.

Everything here is exact integer arithmetic.  The combinatorial complex is an
independent oracle for the closed-form genus and boundary counts.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from math import prod
from typing import Callable

__all__ = [
    "TopologicalType",
    "CombSurface",
    "UnsupportedParameterError",
    "InapplicableError",
    "stacking_topology",
    "build_combinatorial_stacking",
    "euler_characteristic",
    "umbilic_budget",
    "max_symmetry_certificate",
    "rotation_fixed_umbilic_order",
    "polymorphism_family",
    "odd_primes",
]


class UnsupportedParameterError(ValueError):
    pass


class InapplicableError(ValueError):
    pass


@dataclass(frozen=True)
class TopologicalType:
    genus: int
    boundary_components: int

    @property
    def euler_char(self) -> int:
        return 2 - 2 * self.genus - self.boundary_components


@dataclass
class CombSurface:
    """Abstract 2-dimensional CW complex.

    Edges are vertex pairs; faces are lists of edge indices.  The boundary
    cycles are lists of edge indices forming closed loops.
    """

    n_vertices: int
    edges: list[tuple[int, int]] = field(default_factory=list)
    faces: list[list[int]] = field(default_factory=list)

    def edge_face_counts(self) -> list[int]:
        counts = [0] * len(self.edges)
        for f in self.faces:
            for e in f:
                counts[e] += 1
        return counts

    def boundary_edges(self) -> list[int]:
        return [e for e, c in enumerate(self.edge_face_counts()) if c == 1]

    def boundary_cycles(self) -> list[list[int]]:
        """Connected loops of boundary edges (every boundary vertex has degree 2)."""
        incident: dict[int, list[int]] = defaultdict(list)
        for e in self.boundary_edges():
            a, b = self.edges[e]
            incident[a].append(e)
            incident[b].append(e)
        for v, es in incident.items():
            if len(es) != 2:
                raise ValueError(f"boundary vertex {v} has degree {len(es)}, boundary is not a union of circles")
        seen: set[int] = set()
        cycles = []
        for start in self.boundary_edges():
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            a, b = self.edges[start]
            current = b
            while current != a:
                nxt = next(e for e in incident[current] if e not in seen)
                seen.add(nxt)
                cycle.append(nxt)
                u, w = self.edges[nxt]
                current = w if u == current else u
            cycles.append(cycle)
        return cycles

    def validate(self) -> None:
        counts = self.edge_face_counts()
        if any(c == 0 or c > 2 for c in counts):
            raise ValueError("every edge must bound one or two faces")


def _check_params(N: int, m: int) -> None:
    if N < 1:
        raise UnsupportedParameterError(f"need N >= 1, got {N}")
    if m < 3:
        raise UnsupportedParameterError(f"need m >= 3, got {m}")


def stacking_topology(N: int, m: int) -> TopologicalType:
    """Genus and boundary count of the N-layer stacking with m ribbons per gap."""
    _check_params(N, m)
    if N == 1:
        return TopologicalType(0, 1)
    if N % 2 == 0:
        return TopologicalType((m - 1) * (N - 2) // 2, m)
    return TopologicalType((m - 1) * (N - 1) // 2, 1)


def ribbon_slots(i: int, m: int) -> list[int]:
    """Angular slots used by ribbons joining layer i to layer i + 1.

    Slot j sits at angle (2j + 1) pi / (2m); consecutive gaps alternate parity.
    """
    return [j for j in range(2 * m) if j % 2 == (i - 1) % 2]


def build_combinatorial_stacking(N: int, m: int) -> CombSurface:
    """N polygonal discs with 2m boundary slots each, joined by quadrilateral ribbons."""
    _check_params(N, m)
    surf = CombSurface(n_vertices=4 * m * N)

    def vid(layer: int, k: int) -> int:
        return (layer - 1) * 4 * m + (k % (4 * m))

    # vertex 2j and 2j+1 bound slot j; the other boundary edges are gaps
    slot_edge: dict[tuple[int, int], int] = {}
    for layer in range(1, N + 1):
        ring = []
        for k in range(4 * m):
            surf.edges.append((vid(layer, k), vid(layer, k + 1)))
            e = len(surf.edges) - 1
            ring.append(e)
            if k % 2 == 0:
                slot_edge[(layer, k // 2)] = e
        surf.faces.append(ring)

    for layer in range(1, N):
        for j in ribbon_slots(layer, m):
            a = (layer, 2 * j)
            b = (layer, 2 * j + 1)
            surf.edges.append((vid(*a), vid(layer + 1, 2 * j)))
            side_a = len(surf.edges) - 1
            surf.edges.append((vid(*b), vid(layer + 1, 2 * j + 1)))
            side_b = len(surf.edges) - 1
            surf.faces.append([slot_edge[(layer, j)], side_b, slot_edge[(layer + 1, j)], side_a])
    surf.validate()
    return surf


def euler_characteristic(s: CombSurface) -> int:
    return s.n_vertices - len(s.edges) + len(s.faces)


def combinatorial_topology(s: CombSurface) -> TopologicalType:
    chi = euler_characteristic(s)
    beta = len(s.boundary_cycles())
    two_genus = 2 - chi - beta
    if two_genus % 2:
        raise ValueError("odd 2 - chi - beta; complex is not an orientable surface")
    return TopologicalType(two_genus // 2, beta)


def umbilic_budget(genus: int, boundary: int) -> int:
    """Total umbilic order 8 genus + 4 boundary - 8 of a free boundary minimal surface."""
    if genus == 0 and boundary == 1:
        raise InapplicableError("the umbilic count does not apply to a disc")
    if genus < 0 or boundary < 1:
        raise ValueError("need genus >= 0 and at least one boundary component")
    return 8 * genus + 4 * boundary - 8


def rotation_fixed_umbilic_order(k: int) -> int:
    """Lower bound on the umbilic order at a point fixed by a rotation of order k."""
    return k - 2


def max_symmetry_certificate(N: int, m: int) -> dict:
    """Compare the umbilic budget with what an extra symmetry would force.

    The budget must be at least 4(m-1)N if an extra symmetry preserved the
    vertical axis, and at least 2(m-2)(m+1)N if it did not (even N only; for odd
    N the surface contains the origin and the case is settled by that).
    """
    if m < 3:
        raise UnsupportedParameterError("certificate is indeterminate for m < 3")
    topo = stacking_topology(N, m)
    budget = 4 * (m - 1) * N - 4 * m
    if N > 1 or topo.genus > 0:
        assert budget == umbilic_budget(topo.genus, topo.boundary_components)
    need_preserved = 4 * (m - 1) * N
    need_not_preserved = 2 * (m - 2) * (m + 1) * N
    preserved_excluded = budget < need_preserved
    if N % 2 == 0:
        not_preserved_excluded = budget < need_not_preserved
        not_preserved_note = "numeric"
    else:
        not_preserved_excluded = True
        not_preserved_note = "handled by containment argument (odd N contains the origin)"
    return {
        "N": N,
        "m": m,
        "budget": budget,
        "required_if_axis_preserved": need_preserved,
        "required_if_axis_not_preserved": need_not_preserved if N % 2 == 0 else None,
        "axis_preserved_excluded": preserved_excluded,
        "axis_not_preserved_excluded": not_preserved_excluded,
        "axis_not_preserved_case": not_preserved_note,
        "axis_point_order": rotation_fixed_umbilic_order(m),
        "axis_point_order_if_axis_preserved": rotation_fixed_umbilic_order(2 * m),
        "extra_symmetry_excluded": preserved_excluded and not_preserved_excluded,
    }


def odd_primes(k: int) -> list[int]:
    primes: list[int] = []
    candidate = 3
    while len(primes) < k:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 2
    return primes


def polymorphism_family(k: int, m0: Callable[[int], int] = lambda N: 3) -> list[dict]:
    """k stackings with odd layer counts sharing one genus and one boundary circle.

    ``m0`` is the caller's threshold on m as a function of N.
    """
    if k < 1:
        raise ValueError("k must be positive")
    primes = odd_primes(k)
    layers = [1 + 2 * p for p in primes]
    head = prod(primes[:-1])
    threshold = max(m0(N) for N in layers)
    q = threshold // head + 1
    genus = q * prod(primes)
    family = []
    for i, N in enumerate(layers):
        m = 1 + q * prod(p for j, p in enumerate(primes) if j != i)
        topo = stacking_topology(N, m)
        if topo.genus != genus or topo.boundary_components != 1:
            raise AssertionError(f"family member (N={N}, m={m}) has type {topo}, expected genus {genus}")
        family.append({"N": N, "m": m, "genus": genus, "boundary": 1, "group_order": 4 * m, "q": q})
    return family
