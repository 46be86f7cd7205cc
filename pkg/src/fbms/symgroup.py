"""Finite subgroups of O(3) acting on the unit ball.

The standard groups are generated from explicit rotations and reflections
through planes or lines containing the origin.  Group elements are stored as
3x3 matrices and deduplicated by Frobenius distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "Isometry",
    "SymmetryGroup",
    "NormalCharacter",
    "InvalidParameterError",
    "NonFiniteGroupError",
    "AmbiguousSignError",
    "MissingOrbitPointError",
    "rotation",
    "reflection",
    "standard_group",
    "generate_group",
    "normal_sign",
    "character_from_normals",
    "project_equivariant",
    "orbit_permutations",
    "character_from_generators",
]

ORTHO_TOL = 1e-12
DEDUP_TOL = 1e-9
SIGN_TOL = 1e-6
ORBIT_TOL = 1e-9

KINDS = ("cyclic", "pyramidal", "prismatic", "antiprismatic")
ORDER_FACTOR = {"cyclic": 1, "pyramidal": 2, "prismatic": 4, "antiprismatic": 4}


class InvalidParameterError(ValueError):
    pass


class NonFiniteGroupError(RuntimeError):
    pass


class AmbiguousSignError(ValueError):
    pass


class MissingOrbitPointError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Isometry:
    """An orthogonal linear map of R^3."""

    matrix: np.ndarray
    label: str | None = None

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=float)
        if mat.shape != (3, 3):
            raise InvalidParameterError(f"isometry matrix must be 3x3, got {mat.shape}")
        if np.max(np.abs(mat @ mat.T - np.eye(3))) > ORTHO_TOL * 10:
            raise InvalidParameterError("matrix is not orthogonal")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def det(self) -> int:
        return int(round(np.linalg.det(self.matrix)))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        return Isometry(self.matrix.T, None if self.label is None else f"{self.label}^-1")

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to a single point or an (n, 3) array of points."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.matrix.T

    def distance(self, other: "Isometry") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix))


def rotation(axis: Sequence[float], angle: float, label: str | None = None) -> Isometry:
    """Rotation by ``angle`` about the line through the origin spanned by ``axis``."""
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    k = np.array([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]])
    mat = np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)
    return Isometry(mat, label)


def reflection(normal: Sequence[float], label: str | None = None) -> Isometry:
    """Reflection through the plane through the origin orthogonal to ``normal``."""
    u = np.asarray(normal, dtype=float)
    u = u / np.linalg.norm(u)
    return Isometry(np.eye(3) - 2.0 * np.outer(u, u), label)


@dataclass(frozen=True, eq=False)
class SymmetryGroup:
    elements: tuple[Isometry, ...]
    generators: tuple[Isometry, ...]
    kind: str = "custom"
    order_param: int = 0
    _stack: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        stack = np.stack([g.matrix for g in self.elements]) if self.elements else np.zeros((0, 3, 3))
        stack.setflags(write=False)
        object.__setattr__(self, "_stack", stack)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index_of(self, g: Isometry | np.ndarray) -> int:
        mat = g.matrix if isinstance(g, Isometry) else np.asarray(g, dtype=float)
        dist = np.linalg.norm(self._stack - mat, axis=(1, 2))
        j = int(np.argmin(dist))
        if dist[j] >= DEDUP_TOL:
            raise KeyError("matrix is not an element of this group")
        return j

    def contains(self, g: Isometry | np.ndarray) -> bool:
        try:
            self.index_of(g)
        except KeyError:
            return False
        return True

    def is_closed(self) -> bool:
        """Exhaustive check of closure under products and inverses."""
        for a in self.elements:
            if not self.contains(a.inverse()):
                return False
            for b in self.elements:
                if not self.contains(a @ b):
                    return False
        return True

    def same_elements(self, other: "SymmetryGroup") -> bool:
        return self.order == other.order and all(other.contains(g) for g in self.elements)


def generate_group(
    generators: Iterable[Isometry],
    cap: int = 10_000,
    kind: str = "custom",
    order_param: int = 0,
) -> SymmetryGroup:
    """Close a set of generators under composition.

    Raises NonFiniteGroupError when more than ``cap`` distinct elements appear.
    """
    gens = tuple(generators)
    identity = Isometry(np.eye(3), "id")
    elements: list[Isometry] = [identity]
    frontier: list[Isometry] = [identity]

    def known(mat: np.ndarray) -> bool:
        return any(np.linalg.norm(e.matrix - mat) < DEDUP_TOL for e in elements)

    while frontier:
        new: list[Isometry] = []
        for a in frontier:
            for g in gens:
                prod = g.matrix @ a.matrix
                if not known(prod):
                    elem = Isometry(prod)
                    elements.append(elem)
                    new.append(elem)
                    if len(elements) > cap:
                        raise NonFiniteGroupError(
                            f"closure exceeded cap={cap}; generators do not span a finite group"
                        )
        frontier = new
    return SymmetryGroup(tuple(elements), gens, kind, order_param)


def standard_generators(kind: str, m: int) -> list[Isometry]:
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown group kind {kind!r}")
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidParameterError(f"order parameter must be a positive integer, got {m}")
    z_axis = (0.0, 0.0, 1.0)
    gens = [rotation(z_axis, 2.0 * np.pi / m, f"rot_z(2pi/{m})")]
    if kind == "cyclic":
        return gens
    # vertical mirror plane y = x tan(pi/(2m)), normal (-sin, cos, 0)
    half = np.pi / (2 * m)
    gens.append(reflection((-np.sin(half), np.cos(half), 0.0), f"refl(y=x tan(pi/{2 * m}))"))
    if kind == "prismatic":
        gens.append(reflection(z_axis, "refl(z=0)"))
    elif kind == "antiprismatic":
        gens.append(rotation((1.0, 0.0, 0.0), np.pi, "rot_x(pi)"))
    return gens


def standard_group(kind: str, m: int) -> SymmetryGroup:
    """Cyclic, pyramidal, prismatic or antiprismatic group with parameter m."""
    gens = standard_generators(kind, m)
    group = generate_group(gens, cap=4 * int(m) + 1, kind=kind, order_param=int(m))
    expected = ORDER_FACTOR[kind] * m
    if group.order != expected:
        raise NonFiniteGroupError(f"{kind} group with m={m} has order {group.order}, expected {expected}")
    return group


def stacking_group(N: int, m: int) -> SymmetryGroup:
    """Symmetry group of an N-layer stacking: prismatic for even N, antiprismatic for odd N."""
    return standard_group("prismatic" if N % 2 == 0 else "antiprismatic", m)


def normal_sign(
    g: Isometry,
    point: Sequence[float],
    normal: Sequence[float],
    normal_at: Callable[[np.ndarray], np.ndarray],
) -> int:
    """Sign of the pushed-forward normal against the surface normal at the image point."""
    nu = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-8:
        raise InvalidParameterError("sample normal must have unit length")
    image = g.apply(np.asarray(point, dtype=float))
    pushed = g.matrix @ nu
    ip = float(pushed @ np.asarray(normal_at(image), dtype=float))
    if abs(ip) < SIGN_TOL:
        raise AmbiguousSignError(f"inner product {ip:.3e} too close to zero to decide the sign")
    return 1 if ip > 0 else -1


@dataclass(frozen=True)
class NormalCharacter:
    """Sign character of a group, stored by element index."""

    group: SymmetryGroup
    signs: tuple[int, ...]

    def __call__(self, g: Isometry | int) -> int:
        j = g if isinstance(g, (int, np.integer)) else self.group.index_of(g)
        return self.signs[j]

    def is_homomorphism(self) -> bool:
        grp = self.group
        for a, sa in zip(grp.elements, self.signs):
            for b, sb in zip(grp.elements, self.signs):
                if self(a @ b) != sa * sb:
                    return False
        return True

    @classmethod
    def trivial(cls, group: SymmetryGroup) -> "NormalCharacter":
        return cls(group, (1,) * group.order)

    @classmethod
    def from_determinant(cls, group: SymmetryGroup) -> "NormalCharacter":
        return cls(group, tuple(g.det for g in group.elements))


def character_from_normals(
    group: SymmetryGroup,
    points: np.ndarray,
    normals: np.ndarray,
    normal_at: Callable[[np.ndarray], np.ndarray],
) -> NormalCharacter:
    """Empirical normal character; raises if samples disagree for some element."""
    pts = np.atleast_2d(points)
    nus = np.atleast_2d(normals)
    signs = []
    for g in group.elements:
        found: set[int] = set()
        for p, nu in zip(pts, nus):
            try:
                found.add(normal_sign(g, p, nu, normal_at))
            except AmbiguousSignError:
                continue
        if len(found) != 1:
            raise AmbiguousSignError(f"element {g.label or ''} gives inconsistent signs {sorted(found)}")
        signs.append(found.pop())
    return NormalCharacter(group, tuple(signs))


def character_from_generators(group: SymmetryGroup, generator_signs: Sequence[int]) -> NormalCharacter:
    """Extend signs prescribed on the generators to a character, checking consistency."""
    if len(generator_signs) != len(group.generators):
        raise InvalidParameterError("one sign per generator required")
    identity = group.index_of(np.eye(3))
    signs: dict[int, int] = {identity: 1}
    frontier = [identity]
    while frontier:
        new = []
        for j in frontier:
            for g, s in zip(group.generators, generator_signs):
                k = group.index_of(g.matrix @ group.elements[j].matrix)
                value = s * signs[j]
                if k in signs:
                    if signs[k] != value:
                        raise AmbiguousSignError("generator signs do not define a character")
                else:
                    signs[k] = value
                    new.append(k)
        frontier = new
    return NormalCharacter(group, tuple(signs[j] for j in range(group.order)))


def orbit_permutations(points: np.ndarray, group: SymmetryGroup, tol: float = ORBIT_TOL) -> np.ndarray:
    """Index maps ``perm[j, i]`` of the sample carried to sample i by element j, i.e. g_j^-1 p_i.

    Raises MissingOrbitPointError when the sample set is not closed under the group.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tree = cKDTree(pts)
    perms = np.empty((group.order, len(pts)), dtype=np.int64)
    for j, g in enumerate(group.elements):
        dist, idx = tree.query(g.inverse().apply(pts))
        if np.max(dist, initial=0.0) > tol:
            bad = int(np.argmax(dist))
            raise MissingOrbitPointError(
                f"image of sample {bad} under element {j} is not in the sample set (gap {dist[bad]:.2e})"
            )
        perms[j] = idx
    return perms


def project_equivariant(
    values: np.ndarray,
    points: np.ndarray,
    group: SymmetryGroup,
    character: NormalCharacter | Mapping[int, int] | None = None,
) -> np.ndarray:
    """Average ``character(g) * values(g^-1 p)`` over the group.

    ``points`` is the sample set, which must be closed under the action.
    ``values`` may carry trailing axes.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.asarray(values, dtype=float)
    if vals.shape[0] != pts.shape[0]:
        raise InvalidParameterError("values and points must have the same leading length")
    perms = orbit_permutations(pts, group)
    out = np.zeros_like(vals)
    for j in range(group.order):
        sign = 1 if character is None else character(j) if callable(character) else character[j]
        out += sign * vals[perms[j]]
    return out / group.order
