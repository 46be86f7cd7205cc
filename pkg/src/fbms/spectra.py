"""Model spectral problems on rectangles and perforated rectangles.

Two independent routes are provided: the transcendental equations satisfied by
the rotationally invariant eigenfunctions of  d_t^2 + d_theta^2 + 2 sech^2 t
on the half-catenoid rectangle, and a cell-centred finite-volume discretization
of mixed Dirichlet/Neumann/Robin Schroedinger problems on rectilinear grids.

Eigenvalue convention: lambda is an eigenvalue if  -Delta u - q u = lambda u,
so negative eigenvalues count towards the index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import bisect

from .symgroup import (
    MissingOrbitPointError,
    character_from_generators,
    generate_group,
    orbit_permutations,
    reflection,
    rotation,
)

__all__ = [
    "ModelDomain",
    "SpectralProblem",
    "Spectrum",
    "ClosedFormResult",
    "InapplicableError",
    "IncompatibleSymmetryError",
    "make_domain",
    "catenoid_potential",
    "catenoid_problem",
    "neumann_rect_problem",
    "catenoid_closed_form",
    "catenoid_closed_form_counts",
    "fd_eigensolve",
    "model_low_spectrum_counts",
    "spectral_shift_bound",
    "metric_deviation",
    "trace_probe",
]

DENSE_LIMIT = 3000
BISECT_TOL = 1e-12
ZERO_FACTOR = 10.0
FAMILIES = (
    "dirichlet-t-even",
    "neumann-t-even",
    "neumann-t-odd",
    "neumann-oscillatory-even",
    "neumann-oscillatory-odd",
)
SYMMETRY_NAMES = ("t", "theta", "origin")


class InapplicableError(ValueError):
    pass


class IncompatibleSymmetryError(ValueError):
    pass


# ---------------------------------------------------------------- domains


def _uniform_edges(lo: float, hi: float, h: float) -> np.ndarray:
    n = max(1, int(round((hi - lo) / h)))
    return np.linspace(lo, hi, n + 1)


def _graded_edges(length: float, h_min: float, h_max: float, ratio: float = 1.12) -> np.ndarray:
    """Edges on [0, length] starting at spacing h_min near 0, growing geometrically up to h_max."""
    widths = []
    w, total = h_min, 0.0
    while total < length:
        widths.append(w)
        total += w
        w = min(w * ratio, h_max)
    widths = np.asarray(widths)
    widths *= length / widths.sum()
    return np.concatenate([[0.0], np.cumsum(widths)])


def _symmetric_graded_edges(half: float, h_min: float, h_max: float) -> np.ndarray:
    """Edges on [-half, half], fine near both ends, symmetric about 0."""
    one_side = _graded_edges(half, h_min, h_max)
    left = -half + one_side
    return np.concatenate([left, -left[-2::-1]])


@dataclass(frozen=True)
class ModelDomain:
    """Rectilinear cell grid on a model domain, with an active-cell mask.

    Axis 0 is t (catenoid rectangle) or sigma (margin rectangles); axis 1 is theta.
    Edge names are ``lo0``, ``hi0``, ``lo1``, ``hi1``.
    """

    kind: str
    edges0: np.ndarray
    edges1: np.ndarray
    mask: np.ndarray
    T: float | None = None
    r: float | None = None

    @property
    def centers0(self) -> np.ndarray:
        return 0.5 * (self.edges0[1:] + self.edges0[:-1])

    @property
    def centers1(self) -> np.ndarray:
        return 0.5 * (self.edges1[1:] + self.edges1[:-1])

    @property
    def widths0(self) -> np.ndarray:
        return np.diff(self.edges0)

    @property
    def widths1(self) -> np.ndarray:
        return np.diff(self.edges1)

    @property
    def h(self) -> float:
        return float(max(self.widths0.max(), self.widths1.max()))

    @property
    def h_min(self) -> float:
        return float(min(self.widths0.min(), self.widths1.min()))

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.edges0) - 1, len(self.edges1) - 1)

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.centers0, self.centers1, indexing="ij")

    def symmetry_center(self) -> tuple[float, float]:
        return (0.5 * (self.edges0[0] + self.edges0[-1]), 0.5 * (self.edges1[0] + self.edges1[-1]))


def make_domain(
    kind: str,
    h: float,
    T: float | None = None,
    r: float | None = None,
    cells_per_radius: int = 8,
) -> ModelDomain:
    """Build a model domain grid with maximal spacing h.

    Perforated kinds are graded geometrically towards the perforated corners so
    that each perforation radius spans at least ``cells_per_radius`` cells.
    """
    half_pi = 0.5 * np.pi
    if kind == "catenoid_rect":
        if T is None or not np.isfinite(T) or T <= 0:
            raise ValueError("catenoid_rect needs a finite T > 0")
        e0 = _uniform_edges(-T, T, h)
        e1 = _uniform_edges(-half_pi, half_pi, h)
        return ModelDomain(kind, e0, e1, np.ones((len(e0) - 1, len(e1) - 1), bool), T=T)
    if kind == "rectangle":
        e0 = _uniform_edges(0.0, 3.0, h)
        e1 = _uniform_edges(-half_pi, half_pi, h)
        return ModelDomain(kind, e0, e1, np.ones((len(e0) - 1, len(e1) - 1), bool))
    if kind in ("perforated_one", "perforated_two"):
        if r is None or not 0 < r < half_pi:
            raise ValueError("perforation radius must satisfy 0 < r < pi/2")
        fine = min(h, r / cells_per_radius)
        e0 = _graded_edges(3.0, fine, h)
        e1 = _symmetric_graded_edges(half_pi, fine, h)
        c0, c1 = np.meshgrid(0.5 * (e0[1:] + e0[:-1]), 0.5 * (e1[1:] + e1[:-1]), indexing="ij")
        mask = c0**2 + (c1 - half_pi) ** 2 > r**2
        if kind == "perforated_two":
            mask &= c0**2 + (c1 + half_pi) ** 2 > r**2
        return ModelDomain(kind, e0, e1, mask, r=r)
    raise ValueError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------- problems


def catenoid_potential(t: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return 2.0 / np.cosh(t) ** 2


@dataclass(frozen=True)
class SpectralProblem:
    """Quadratic form  int |du|^2 - q u^2 c  -  int_R robin u^2  with L^2 weight c.

    ``bc`` maps each edge name to 'dirichlet', 'neumann' or 'robin'.  Staircase
    perforation boundaries are always Neumann.  ``conformal`` is the factor c of
    a conformally flat metric c (dx^2 + dy^2).
    """

    domain: ModelDomain
    potential: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    bc: dict = field(default_factory=lambda: {"lo0": "neumann", "hi0": "neumann", "lo1": "neumann", "hi1": "neumann"})
    robin: float = 0.0
    symmetry: tuple[str, ...] = ()
    conformal: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None


def catenoid_problem(T: float, h: float, dirichlet: bool, symmetry: Sequence[str] = ()) -> SpectralProblem:
    """L_K on the half-catenoid rectangle, Dirichlet or Neumann at |t| = T, Neumann at |theta| = pi/2."""
    end = "dirichlet" if dirichlet else "neumann"
    return SpectralProblem(
        make_domain("catenoid_rect", h, T=T),
        potential=catenoid_potential,
        bc={"lo0": end, "hi0": end, "lo1": "neumann", "hi1": "neumann"},
        symmetry=tuple(symmetry),
    )


def neumann_rect_problem(kind: str, h: float, r: float | None = None, symmetry: Sequence[str] = ()) -> SpectralProblem:
    return SpectralProblem(make_domain(kind, h, r=r), symmetry=tuple(symmetry))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    negative: int
    zero: int
    positive: int
    h: float
    zero_tol: float
    converged: bool = True
    residual: float = 0.0
    vectors: np.ndarray | None = field(default=None, repr=False)
    note: str = ""


def _assemble(problem: SpectralProblem) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
    """Stiffness matrix K (including potential and Robin terms) and mass vector on active cells."""
    dom = problem.domain
    n0, n1 = dom.shape
    w0, w1 = dom.widths0, dom.widths1
    c0, c1 = dom.centers0, dom.centers1
    mask = dom.mask
    active_idx = -np.ones((n0, n1), dtype=np.int64)
    active_idx[mask] = np.arange(mask.sum())
    X0, X1 = dom.centers()
    area = np.outer(w0, w1)
    conf = np.ones_like(area) if problem.conformal is None else np.asarray(problem.conformal(X0, X1), float) * np.ones_like(area)
    q = np.zeros_like(area) if problem.potential is None else np.asarray(problem.potential(X0, X1), float) * np.ones_like(area)

    diag = np.zeros((n0, n1))
    rows, cols, vals = [], [], []

    # interior links along axis 0
    coef0 = w1[None, :] / np.diff(c0)[:, None]
    both0 = mask[:-1, :] & mask[1:, :]
    a, b = active_idx[:-1, :][both0], active_idx[1:, :][both0]
    cf = coef0[both0]
    rows += [a, b]
    cols += [b, a]
    vals += [-cf, -cf]
    np.add.at(diag, np.nonzero(both0), coef0[both0])
    ii, jj = np.nonzero(both0)
    np.add.at(diag, (ii + 1, jj), coef0[both0])

    coef1 = w0[:, None] / np.diff(c1)[None, :]
    both1 = mask[:, :-1] & mask[:, 1:]
    a, b = active_idx[:, :-1][both1], active_idx[:, 1:][both1]
    cf = coef1[both1]
    rows += [a, b]
    cols += [b, a]
    vals += [-cf, -cf]
    np.add.at(diag, np.nonzero(both1), coef1[both1])
    ii, jj = np.nonzero(both1)
    np.add.at(diag, (ii, jj + 1), coef1[both1])

    # outer boundary faces
    faces = {
        "lo0": (np.s_[0, :], w1, w0[0]),
        "hi0": (np.s_[-1, :], w1, w0[-1]),
        "lo1": (np.s_[:, 0], w0, w1[0]),
        "hi1": (np.s_[:, -1], w0, w1[-1]),
    }
    for name, (sl, face_len, cell_w) in faces.items():
        kind = problem.bc.get(name, "neumann")
        if kind == "neumann":
            continue
        if kind == "dirichlet":
            add = face_len / (0.5 * cell_w)
        elif kind == "robin":
            add = -problem.robin * face_len
        else:
            raise ValueError(f"unknown boundary condition {kind!r} on {name}")
        edge = diag[sl]
        edge += np.where(mask[sl], add, 0.0)
        diag[sl] = edge

    diag -= q * conf * area
    act = active_idx[mask]
    rows.append(act)
    cols.append(act)
    vals.append(diag[mask])
    n = int(mask.sum())
    K = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    mass = (conf * area)[mask]
    return K, mass, q[mask]


_GENERATORS = {
    "t": reflection((1.0, 0.0, 0.0), "t -> -t"),
    "theta": reflection((0.0, 1.0, 0.0), "theta -> -theta"),
    "origin": rotation((0.0, 0.0, 1.0), np.pi, "(t, theta) -> -(t, theta)"),
}


def _parse_symmetry(symmetry: Sequence[str]) -> list[tuple[str, int]]:
    parsed = []
    for item in symmetry:
        if item == "none":
            continue
        name, _, parity = item.rpartition("-")
        if name not in SYMMETRY_NAMES or parity not in ("even", "odd"):
            raise IncompatibleSymmetryError(f"unknown symmetry class {item!r}")
        parsed.append((name, 1 if parity == "even" else -1))
    return parsed


def symmetry_basis(domain: ModelDomain, symmetry: Sequence[str]) -> sp.csr_matrix | None:
    """Orthonormal basis (columns) of the grid functions in the given parity class.

    The projector is the group average with the prescribed character, built
    from the orbit permutations of the active cell centres.
    """
    parsed = _parse_symmetry(symmetry)
    if not parsed:
        return None
    gens = [_GENERATORS[name] for name, _ in parsed]
    group = generate_group(gens, cap=8)
    character = character_from_generators(group, [s for _, s in parsed])
    X0, X1 = domain.centers()
    m0, m1 = domain.symmetry_center()
    pts = np.column_stack([X0[domain.mask] - m0, X1[domain.mask] - m1, np.zeros(domain.n_active)])
    scale = max(domain.h, 1.0)
    try:
        perms = orbit_permutations(pts, group, tol=1e-9 * scale)
    except MissingOrbitPointError as exc:
        raise IncompatibleSymmetryError(f"grid is not invariant under {symmetry}: {exc}") from exc
    n = len(pts)
    order = group.order
    seen = np.zeros(n, bool)
    rows, cols, vals = [], [], []
    col = 0
    for i in range(n):
        if seen[i]:
            continue
        # images of i: sample perms[j, i] is carried to i by g_j, so i goes to perms-inverse; use the orbit set
        weights: dict[int, float] = {}
        for j in range(order):
            k = int(perms[j, i])
            weights[k] = weights.get(k, 0.0) + character(j) / order
        orbit = list(weights)
        seen[orbit] = True
        vec = np.array([weights[k] for k in orbit])
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            continue
        rows += orbit
        cols += [col] * len(orbit)
        vals += list(vec / norm)
        col += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, col))


def _axis_operator(edges: np.ndarray, lo_bc: str, hi_bc: str, robin: float, potential: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the mass-scaled 1D cell-centred operator."""
    w = np.diff(edges)
    c = 0.5 * (edges[1:] + edges[:-1])
    link = 1.0 / np.diff(c)
    diag = np.zeros_like(w)
    diag[:-1] += link
    diag[1:] += link
    for idx, bc in ((0, lo_bc), (-1, hi_bc)):
        if bc == "dirichlet":
            diag[idx] += 2.0 / w[idx]
        elif bc == "robin":
            diag[idx] -= robin
        elif bc != "neumann":
            raise ValueError(f"unknown boundary condition {bc!r}")
    diag -= potential * w
    s = 1.0 / np.sqrt(w)
    return diag * s * s, -link * s[:-1] * s[1:]


def _is_separable(problem: SpectralProblem) -> bool:
    dom = problem.domain
    if problem.conformal is not None or not dom.mask.all():
        return False
    if problem.potential is None:
        return True
    # probe a few theta lines rather than the full grid, which can be large
    c0, c1 = dom.centers0, dom.centers1
    ref = np.asarray(problem.potential(c0, np.full_like(c0, c1[0])), float)
    for y in c1[np.linspace(0, len(c1) - 1, 7).astype(int)]:
        if not np.array_equal(np.asarray(problem.potential(c0, np.full_like(c0, y)), float) * np.ones_like(c0), ref * np.ones_like(c0)):
            return False
    return True


def _parity(vec: np.ndarray) -> int:
    overlap = float(vec @ vec[::-1]) / float(vec @ vec)
    if abs(abs(overlap) - 1.0) > 1e-6:
        return 0
    return 1 if overlap > 0 else -1


def _separable_eigensolve(problem: SpectralProblem, k: int, return_vectors: bool) -> tuple[np.ndarray, np.ndarray | None, float]:
    """Exact eigenpairs of the same 5-point matrix via its Kronecker-sum structure.

    With a potential depending on the first axis only, the scaled matrix is
    A0 (x) I + I (x) A1, so its eigenvalues are sums of 1D tridiagonal eigenvalues.
    """
    dom = problem.domain
    bc = {name: problem.bc.get(name, "neumann") for name in ("lo0", "hi0", "lo1", "hi1")}
    q0 = np.zeros(dom.shape[0])
    if problem.potential is not None:
        q0 = np.asarray(problem.potential(dom.centers0, np.zeros(dom.shape[0])), float) * np.ones(dom.shape[0])
    parsed = dict(_parse_symmetry(problem.symmetry))
    pairs = []
    for axis, edges, lo, hi, q in ((0, dom.edges0, bc["lo0"], bc["hi0"], q0), (1, dom.edges1, bc["lo1"], bc["hi1"], np.zeros(dom.shape[1]))):
        d, e = _axis_operator(edges, lo, hi, problem.robin, q)
        want = min(len(d), k + 8) if parsed else min(len(d), k)
        w, v = scipy.linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, want - 1))
        par = np.array([_parity(v[:, i]) for i in range(v.shape[1])])
        pairs.append((w, v, par))
    (w0, v0, p0), (w1, v1, p1) = pairs
    if parsed:
        m0, m1 = dom.symmetry_center()
        for name, axis_edges, centre in (("t", dom.edges0, m0), ("theta", dom.edges1, m1)):
            if name in parsed or "origin" in parsed:
                if not np.allclose(axis_edges + axis_edges[::-1], 2 * centre, atol=1e-12):
                    raise IncompatibleSymmetryError(f"grid is not symmetric along {name}")
    cand = []
    for i, a in enumerate(w0):
        for j, b in enumerate(w1):
            tp, hp = p0[i], p1[j]
            if "t" in parsed and tp != parsed["t"]:
                continue
            if "theta" in parsed and hp != parsed["theta"]:
                continue
            if "origin" in parsed and tp * hp != parsed["origin"]:
                continue
            cand.append((a + b, i, j))
    cand.sort()
    cand = cand[:k]
    vals = np.array([c[0] for c in cand])
    vecs = None
    if return_vectors:
        vecs = np.column_stack([np.outer(v0[:, i], v1[:, j]).ravel() for _, i, j in cand])
    return vals, vecs, 0.0


def fd_eigensolve(problem: SpectralProblem, k: int = 6, return_vectors: bool = False, method: str = "auto") -> Spectrum:
    """Lowest k eigenvalues of the discretized form in its symmetry class.

    ``method`` is 'sparse' (assembled matrix, dense or shift-invert solve),
    'separable' (Kronecker-sum solve, only when the potential depends on the
    first axis alone on a full rectangle) or 'auto'.
    """
    if method not in ("auto", "sparse", "separable"):
        raise ValueError(f"unknown method {method!r}")
    separable = _is_separable(problem)
    if method == "separable" and not separable:
        raise ValueError("problem is not separable")
    h = problem.domain.h
    tol = ZERO_FACTOR * h * h
    if method == "separable" or (method == "auto" and separable):
        w, vectors, residual = _separable_eigensolve(problem, k, return_vectors)
        if return_vectors:
            vectors = vectors / np.sqrt(np.outer(problem.domain.widths0, problem.domain.widths1).ravel())[:, None]
        return Spectrum(
            eigenvalues=w,
            negative=int(np.sum(w < -tol)),
            zero=int(np.sum(np.abs(w) <= tol)),
            positive=int(np.sum(w > tol)),
            h=h,
            zero_tol=tol,
            residual=residual,
            vectors=vectors,
            note="separable",
        )
    K, mass, q = _assemble(problem)
    dinv = 1.0 / np.sqrt(mass)
    A = sp.diags(dinv) @ K @ sp.diags(dinv)
    Q = symmetry_basis(problem.domain, problem.symmetry)
    if Q is not None:
        A = (Q.T @ A @ Q).tocsr()
    n = A.shape[0]
    k = min(k, n)
    converged, residual, note = True, 0.0, ""
    if n <= DENSE_LIMIT:
        w, v = scipy.linalg.eigh(A.toarray(), subset_by_index=(0, k - 1))
    else:
        lower = -float(np.max(q, initial=0.0)) - abs(problem.robin) * 4.0 / problem.domain.h_min - 1.0
        try:
            w, v = spla.eigsh(A.tocsc(), k=k, sigma=lower, which="LM", tol=1e-12)
        except spla.ArpackNoConvergence as exc:
            w, v = exc.eigenvalues, exc.eigenvectors
            converged = False
            note = f"ARPACK returned {len(w)} of {k} eigenpairs"
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    if len(w):
        residual = float(np.max(np.linalg.norm(A @ v - v * w, axis=0)))
        if residual > 1e-6:
            converged = False
    vectors = None
    if return_vectors:
        full = v if Q is None else Q @ v
        vectors = full * dinv[:, None]
    return Spectrum(
        eigenvalues=np.asarray(w),
        negative=int(np.sum(w < -tol)),
        zero=int(np.sum(np.abs(w) <= tol)),
        positive=int(np.sum(w > tol)),
        h=h,
        zero_tol=tol,
        converged=converged,
        residual=residual,
        vectors=vectors,
        note=note,
    )


def grid_function(problem: SpectralProblem, vector: np.ndarray) -> np.ndarray:
    """Scatter an active-cell vector back onto the full grid (NaN on masked cells)."""
    out = np.full(problem.domain.shape, np.nan)
    out[problem.domain.mask] = vector
    return out


# ---------------------------------------------------------------- closed forms


@dataclass(frozen=True)
class ClosedFormResult:
    family: str
    T: float
    roots: tuple[float, ...]
    eigenvalues: tuple[float, ...]
    variable: str
    note: str = ""


def _family_function(T: float, family: str) -> tuple[Callable[[float], float], str, float, float]:
    """Pole-free form of the boundary condition, its variable, and a scan interval."""
    th, sech2 = np.tanh(T), 1.0 / np.cosh(T) ** 2
    if family == "dirichlet-t-even":
        # tanh(gamma T) = gamma coth T
        return (lambda g: np.tanh(g * T) - g / th), "gamma", 1e-6, 4.0
    if family == "neumann-t-even":
        # gamma^2 - gamma coth(gamma T) tanh T - sech^2 T, multiplied by tanh(gamma T)
        return (lambda g: (g * g - sech2) * np.tanh(g * T) - g * th), "gamma", 1e-6, 4.0
    if family == "neumann-t-odd":
        return (lambda g: g * g - g * np.tanh(g * T) * th - sech2), "gamma", 1e-6, 4.0
    if family == "neumann-oscillatory-even":
        # gamma^2 + gamma cot(gamma T) tanh T + sech^2 T, times sin(s), with s = gamma T
        return (lambda s: (s * s / T**2 + sech2) * np.sin(s) + (s / T) * np.cos(s) * th), "s", 1e-6, 30.0
    if family == "neumann-oscillatory-odd":
        # gamma^2 - gamma tan(gamma T) tanh T + sech^2 T, times cos(s)
        return (lambda s: (s * s / T**2 + sech2) * np.cos(s) - (s / T) * np.sin(s) * th), "s", 1e-9, 30.0
    raise ValueError(f"unknown family {family!r}")


def catenoid_closed_form(T: float, family: str, max_roots: int = 4, T_min: float = 2.0) -> ClosedFormResult:
    """Positive roots of the boundary condition for one family, by bracketed bisection.

    The oscillatory equations are multiplied by sin(s) or cos(s) to remove
    poles; this introduces no new roots.  In the t-odd Neumann family the root
    gamma = 1 is excluded because the corresponding solution vanishes.
    An empty root list is a no-root report, not an error.
    """
    if T < T_min:
        raise ValueError(f"T={T} below the guard T_min={T_min}")
    f, variable, lo, hi = _family_function(T, family)
    grid = np.linspace(lo, hi, 20001)
    vals = np.array([f(x) for x in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(float(bisect(f, a, b, xtol=BISECT_TOL, rtol=4 * np.finfo(float).eps, maxiter=500)))
        if len(roots) >= max_roots + 1:
            break
    note = ""
    if family == "neumann-t-odd":
        kept = [x for x in roots if abs(x - 1.0) > 1e-8]
        if len(kept) < len(roots):
            note = "excluded gamma = 1"
        roots = kept
    roots = roots[:max_roots]
    if variable == "gamma":
        eig = tuple(-x * x for x in roots)
    else:
        eig = tuple((x / T) ** 2 for x in roots)
    if not roots:
        note = (note + "; no sign change in bracket").lstrip("; ")
    return ClosedFormResult(family, T, tuple(roots), eig, variable, note)


def _theta_modes(parity: int | None, kmax: int = 6) -> list[int]:
    """Neumann modes cos(k (theta + pi/2)), parity (-1)^k under theta -> -theta."""
    return [k for k in range(kmax + 1) if parity is None or (-1) ** k == parity]


def catenoid_closed_form_counts(T: float, dirichlet: bool, symmetry: Sequence[str] = ()) -> tuple[int, int] | None:
    """Negative and zero counts from the closed-form families, when they are complete.

    Only the Neumann problem is fully covered by the rotationally invariant
    families; for Dirichlet this returns None.
    """
    if dirichlet:
        return None
    parsed = dict(_parse_symmetry(symmetry))
    t_par = parsed.get("t")
    th_par = parsed.get("theta")
    origin = parsed.get("origin")
    t_values = []
    if t_par in (None, 1):
        t_values += [(lam, 1) for lam in catenoid_closed_form(T, "neumann-t-even").eigenvalues]
        t_values += [(lam, 1) for lam in catenoid_closed_form(T, "neumann-oscillatory-even").eigenvalues]
    if t_par in (None, -1):
        t_values += [(lam, -1) for lam in catenoid_closed_form(T, "neumann-t-odd").eigenvalues]
        t_values += [(lam, -1) for lam in catenoid_closed_form(T, "neumann-oscillatory-odd").eigenvalues]
    neg = zero = 0
    for lam, tp in t_values:
        for k in _theta_modes(th_par):
            if origin is not None and tp * (-1) ** k != origin:
                continue
            value = lam + k * k
            if value < 0:
                neg += 1
            elif value == 0:
                zero += 1
    return neg, zero


# ---------------------------------------------------------------- counts


def model_low_spectrum_counts(
    model: str,
    parameter: float,
    symmetry: Sequence[str] = (),
    h: float = 1.0 / 16,
    k: int = 8,
) -> dict:
    """Negative and zero counts for a model problem, with the closed-form cross-check.

    ``model`` is one of catenoid_neumann, catenoid_dirichlet, rectangle,
    perforated_one, perforated_two.  The counts are taken at h and h/2; the
    report flags disagreement between resolutions or with the closed form.
    """
    def build(step: float) -> SpectralProblem:
        if model in ("catenoid_neumann", "catenoid_dirichlet"):
            return catenoid_problem(parameter, step, model == "catenoid_dirichlet", symmetry)
        if model == "rectangle":
            return neumann_rect_problem("rectangle", step, symmetry=symmetry)
        if model in ("perforated_one", "perforated_two"):
            return neumann_rect_problem(model, step, r=parameter, symmetry=symmetry)
        raise ValueError(f"unknown model {model!r}")

    coarse = fd_eigensolve(build(h), k)
    fine = fd_eigensolve(build(h / 2), k)
    extrapolated = (4.0 * fine.eigenvalues - coarse.eigenvalues) / 3.0
    oracle = None
    if model.startswith("catenoid"):
        oracle = catenoid_closed_form_counts(parameter, model == "catenoid_dirichlet", symmetry)
    report = {
        "model": model,
        "parameter": parameter,
        "symmetry": list(symmetry),
        "h": h,
        "negative": coarse.negative,
        "zero": coarse.zero,
        "negative_fine": fine.negative,
        "zero_fine": fine.zero,
        "zero_tol": coarse.zero_tol,
        "eigenvalues": coarse.eigenvalues.tolist(),
        "eigenvalues_fine": fine.eigenvalues.tolist(),
        "eigenvalues_extrapolated": extrapolated.tolist(),
        "stable": (coarse.negative, coarse.zero) == (fine.negative, fine.zero),
        "oracle": oracle,
        "converged": coarse.converged and fine.converged,
    }
    report["agrees_with_oracle"] = None if oracle is None else oracle == (fine.negative, fine.zero)
    return report


# ---------------------------------------------------------------- spectral shift


def metric_deviation(g1: np.ndarray, g2: np.ndarray) -> float:
    """sup over points of |g2 - g1| measured with g1; arrays of shape (..., 2, 2)."""
    g1 = np.asarray(g1, float)
    g2 = np.asarray(g2, float)
    inv = np.linalg.inv(g1)
    D = g2 - g1
    prod = inv @ D
    norm2 = np.einsum("...ij,...ji->...", prod, prod)
    return float(np.sqrt(np.max(np.abs(norm2))))


def spectral_shift_bound(
    data1: dict,
    data2: dict,
    lam_k: float,
    C_tr: float,
    C: float = 4.0,
    eps: float = 0.5,
) -> dict:
    """Upper bound on the k-th eigenvalue of the second problem from the first.

    Each data dict holds ``g`` (metric tensors, shape (..., 2, 2)), ``q``
    (potential samples) and ``r`` (Robin samples on the Robin boundary) on a
    common grid.  C is a dimension-only constant; 4 is a configurable choice.
    """
    g_dev = metric_deviation(data1["g"], data2["g"])
    if g_dev >= eps:
        raise InapplicableError(f"metric deviation {g_dev:.3g} is not below eps={eps}")
    sup = lambda a: float(np.max(np.abs(np.asarray(a, float)), initial=0.0))  # noqa: E731
    q1, q2 = np.asarray(data1.get("q", 0.0), float), np.asarray(data2.get("q", 0.0), float)
    r1, r2 = np.asarray(data1.get("r", 0.0), float), np.asarray(data2.get("r", 0.0), float)
    q_sup = sup(q1)
    q_dev = g_dev * q_sup + sup(q2 - q1)
    r_dev = C_tr * (1.0 + C_tr * sup(r1)) * (1.0 + q_sup) * (g_dev + sup(r2 - r1))
    bound = lam_k + C * (q_dev + r_dev) + C * lam_k * (g_dev + r_dev)
    return {"bound": bound, "g_dev": g_dev, "q_dev": q_dev, "r_dev": r_dev, "C": C}


# ---------------------------------------------------------------- trace probe


def _probe_candidates(rng: np.random.Generator, lo0: float, hi0: float, robin_axis: int, n: int):
    """Yield (label, u, du0, du1) callables for random smooth and boundary-concentrated functions."""
    len0 = hi0 - lo0
    yield "constant", (lambda x, y: np.ones_like(x)), (lambda x, y: np.zeros_like(x)), (lambda x, y: np.zeros_like(x))
    for _ in range(n - 1):
        kind = rng.integers(3)
        if kind == 0:
            k0, k1 = rng.integers(0, 4, size=2)
            p0, p1 = rng.uniform(0, 2 * np.pi, size=2)
            c = rng.uniform(-1, 1)
            w0 = k0 * np.pi / len0
            yield (
                "fourier",
                lambda x, y, w0=w0, k1=k1, p0=p0, p1=p1, c=c: c + np.cos(w0 * x + p0) * np.cos(k1 * y + p1),
                lambda x, y, w0=w0, k1=k1, p0=p0, p1=p1, c=c: -w0 * np.sin(w0 * x + p0) * np.cos(k1 * y + p1),
                lambda x, y, w0=w0, k1=k1, p0=p0, p1=p1, c=c: -k1 * np.cos(w0 * x + p0) * np.sin(k1 * y + p1),
            )
        elif kind == 1:
            x0 = rng.uniform(lo0, hi0)
            y0 = rng.uniform(-0.5 * np.pi, 0.5 * np.pi)
            s = rng.uniform(0.1, 1.0)

            def g(x, y, x0=x0, y0=y0, s=s):
                return np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / (2 * s * s))

            yield (
                "bump",
                g,
                lambda x, y, g=g, x0=x0, s=s: -(x - x0) / (s * s) * g(x, y),
                lambda x, y, g=g, y0=y0, s=s: -(y - y0) / (s * s) * g(x, y),
            )
        else:
            eps = rng.uniform(0.05, 0.5)
            along = rng.uniform(0.2, 2.0)
            centre = rng.uniform(lo0, hi0) if robin_axis == 1 else rng.uniform(-0.5 * np.pi, 0.5 * np.pi)
            if robin_axis == 1:
                # concentrated at |theta| = pi/2
                def u(x, y, eps=eps, along=along, c=centre):
                    return np.exp(-(0.5 * np.pi - np.abs(y)) / eps) * np.exp(-((x - c) ** 2) / along**2)

                yield (
                    "edge",
                    u,
                    lambda x, y, u=u, along=along, c=centre: -2 * (x - c) / along**2 * u(x, y),
                    lambda x, y, u=u, eps=eps: np.sign(y) / eps * u(x, y),
                )
            else:
                # concentrated at sigma = 0
                def u(x, y, eps=eps, along=along, c=centre):
                    return np.exp(-x / eps) * np.exp(-((y - c) ** 2) / along**2)

                yield (
                    "edge",
                    u,
                    lambda x, y, u=u, eps=eps: -u(x, y) / eps,
                    lambda x, y, u=u, along=along, c=centre: -2 * (y - c) / along**2 * u(x, y),
                )


def trace_probe(kind: str, n_samples: int = 1000, seed: int = 0, T: float = 3.0, r: float = 0.3, h: float = 0.01) -> dict:
    """Largest sampled ratio of the Robin-edge L^2 norm to  int |u||du| + u^2.

    The Robin edges are |theta| = pi/2 on the catenoid rectangle and the
    unperforated part of sigma = 0 on the perforated rectangles.
    """
    half_pi = 0.5 * np.pi
    if kind == "catenoid_rect":
        lo0, hi0, robin_axis = -T, T, 1
    elif kind in ("perforated_one", "perforated_two"):
        lo0, hi0, robin_axis = 0.0, 3.0, 0
    else:
        raise ValueError(f"trace probe not defined for {kind!r}")
    n0 = int(round((hi0 - lo0) / h))
    n1 = int(round(np.pi / h))
    x = lo0 + (np.arange(n0) + 0.5) * (hi0 - lo0) / n0
    y = -half_pi + (np.arange(n1) + 0.5) * np.pi / n1
    X, Y = np.meshgrid(x, y, indexing="ij")
    dA = (hi0 - lo0) / n0 * np.pi / n1
    inside = np.ones_like(X, bool)
    if kind != "catenoid_rect":
        inside &= X**2 + (Y - half_pi) ** 2 > r**2
        if kind == "perforated_two":
            inside &= X**2 + (Y + half_pi) ** 2 > r**2
    # boundary quadrature nodes
    if robin_axis == 1:
        bx = x
        edges = [(bx, np.full_like(bx, half_pi)), (bx, np.full_like(bx, -half_pi))]
        ds = (hi0 - lo0) / n0
    else:
        top = half_pi - r
        bottom = -half_pi + r if kind == "perforated_two" else -half_pi
        m = int(round((top - bottom) / h))
        by = bottom + (np.arange(m) + 0.5) * (top - bottom) / m
        edges = [(np.zeros_like(by), by)]
        ds = (top - bottom) / m
    rng = np.random.default_rng(seed)
    best, best_label, ratios = 0.0, "", []
    for label, u, du0, du1 in _probe_candidates(rng, lo0, hi0, robin_axis, n_samples):
        U = u(X, Y)
        grad = np.hypot(du0(X, Y), du1(X, Y))
        denom = float(np.sum((np.abs(U) * grad + U * U)[inside]) * dA)
        numer = float(sum(np.sum(u(ex, ey) ** 2) for ex, ey in edges) * ds)
        ratio = numer / denom if denom > 0 else 0.0
        ratios.append(ratio)
        if ratio > best:
            best, best_label = ratio, label
    return {"kind": kind, "max_ratio": best, "argmax": best_label, "n_samples": n_samples, "constant_ratio": ratios[0], "bound": 2.0}
