"""Initial surfaces of an N-layer stacking: height functions, charts and meshes.

Points near the equator of the unit ball are described in coordinates
(sigma, theta, omega) through

    Phi(sigma, theta, omega) = (1 - sigma) (cos theta cos omega, sin theta cos omega, sin omega).

Each layer is a graph omega = h(sigma, theta) over the fundamental wedge
Lambda = [0, 1/3] x [-pi/(2m), pi/(2m)] with quarter-disc perforations at the
corners where half-catenoids attach, replicated by the pyramidal group and
closed up by a flat inner disc.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

from .balance import DerivedParams, StackingParams, derived_parameters

__all__ = [
    "DomainError",
    "RefinementError",
    "Jet",
    "Bridge",
    "LayerSpec",
    "SurfaceMesh",
    "phi_map",
    "phi_inverse",
    "cutoff",
    "layer_specs",
    "fold_theta",
    "height_jet",
    "height_function",
    "height_value",
    "conormal_audit",
    "orbit_audit",
    "self_intersections",
    "vertex_normals",
    "assemble_surface",
    "rho_weight",
    "rho_at",
    "kappa_chart",
    "varpi_chart",
    "vbar_hat",
    "cokernel_w",
    "cokernel_wbar",
    "export_obj",
    "read_obj",
    "export_report",
    "export_patch_csv",
]

SIGMA_MAX = 1.0 / 3.0
OMEGA_MAX = np.pi / 4.0


class DomainError(ValueError):
    pass


class RefinementError(ValueError):
    pass


# ---------------------------------------------------------------- coordinates


def phi_map(sigma, theta, omega, check: bool = True) -> np.ndarray:
    """Phi(sigma, theta, omega); returns an array with a trailing axis of length 3."""
    sigma, theta, omega = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (sigma, theta, omega)))
    if check:
        tol = 1e-12
        if np.any(sigma < -tol) or np.any(sigma > SIGMA_MAX + tol) or np.any(np.abs(omega) > OMEGA_MAX + tol):
            raise DomainError("Phi is defined for 0 <= sigma <= 1/3 and |omega| <= pi/4")
    r = 1.0 - sigma
    return np.stack([r * np.cos(theta) * np.cos(omega), r * np.sin(theta) * np.cos(omega), r * np.sin(omega)], axis=-1)


def phi_inverse(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of Phi on its box, with theta in (-pi, pi]."""
    p = np.asarray(points, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    radius = np.sqrt(x * x + y * y + z * z)
    sigma = 1.0 - radius
    omega = np.arctan2(z, np.hypot(x, y))
    theta = np.arctan2(y, x)
    theta = np.where(theta <= -np.pi, theta + 2 * np.pi, theta)
    if np.any(sigma < -1e-12) or np.any(sigma > SIGMA_MAX + 1e-12) or np.any(np.abs(omega) > OMEGA_MAX + 1e-12):
        raise DomainError("point outside the image of the Phi box")
    return sigma, theta, omega


# ---------------------------------------------------------------- cutoff


def _bump(s: np.ndarray, order: int) -> np.ndarray:
    """exp(-1/s) for s > 0 and its derivatives, zero for s <= 0."""
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    f = np.exp(-1.0 / sp)
    if order == 0:
        out[pos] = f
    elif order == 1:
        out[pos] = f / sp**2
    else:
        out[pos] = f * (1.0 - 2.0 * sp) / sp**4
    return out


def cutoff(x, derivative: int = 0):
    """Smooth step equal to 1 for x <= 1 and 0 for x >= 2 (or its first/second derivative)."""
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    a = [_bump(2.0 - flat, k) for k in range(3)]
    b = [_bump(flat - 1.0, k) for k in range(3)]
    # chain rule for a(x) = f(2 - x)
    a[1] = -a[1]
    total = a[0] + b[0]
    if derivative == 0:
        val = a[0] / total
    elif derivative == 1:
        val = (a[1] * b[0] - a[0] * b[1]) / total**2
    elif derivative == 2:
        num = a[1] * b[0] - a[0] * b[1]
        dnum = a[2] * b[0] - a[0] * b[2]
        dtot = a[1] + b[1]
        val = dnum / total**2 - 2.0 * num * dtot / total**3
    else:
        raise ValueError("derivative must be 0, 1 or 2")
    val = val.reshape(np.shape(np.atleast_1d(x)))
    return val if np.ndim(x) else float(val[0])


# ---------------------------------------------------------------- jets


@dataclass
class Jet:
    """Value, gradient and Hessian of a function of (sigma, theta) at many points."""

    v: np.ndarray
    g: np.ndarray
    h: np.ndarray

    @classmethod
    def constant(cls, value, n: int) -> "Jet":
        return cls(np.full(n, float(value)) if np.ndim(value) == 0 else np.asarray(value, float), np.zeros((n, 2)), np.zeros((n, 2, 2)))

    @classmethod
    def linear(cls, value: np.ndarray, grad: tuple[float, float]) -> "Jet":
        n = len(value)
        g = np.zeros((n, 2))
        g[:, 0], g[:, 1] = grad
        return cls(np.asarray(value, float), g, np.zeros((n, 2, 2)))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.g + other.g, self.h + other.h)
        return Jet(self.v + other, self.g, self.h)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.g, -self.h)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            outer = np.einsum("ni,nj->nij", self.g, other.g)
            return Jet(
                self.v * other.v,
                self.g * other.v[:, None] + other.g * self.v[:, None],
                self.h * other.v[:, None, None] + other.h * self.v[:, None, None] + outer + outer.transpose(0, 2, 1),
            )
        return Jet(self.v * other, self.g * other, self.h * other)

    __rmul__ = __mul__

    def compose(self, f0: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> "Jet":
        """f(u) given f, f', f'' evaluated at u = self.v."""
        return Jet(f0, self.g * f1[:, None], self.h * f1[:, None, None] + np.einsum("ni,nj->nij", self.g, self.g) * f2[:, None, None])


def _cutoff_of(j: Jet) -> Jet:
    return j.compose(cutoff(j.v), cutoff(j.v, 1), cutoff(j.v, 2))


# ---------------------------------------------------------------- layers


@dataclass(frozen=True)
class Bridge:
    """A half-catenoid attached at the corner theta = side * pi/(2m) of the fundamental wedge."""

    side: int
    tau: float
    h_K: float
    catenoid: int


@dataclass(frozen=True)
class LayerSpec:
    index: int
    m: int
    h_B: float
    rotation: float
    bridges: tuple[Bridge, ...]

    def bridge(self, side: int) -> Bridge | None:
        for b in self.bridges:
            if b.side == side:
                return b
        return None

    @property
    def normal_sign(self) -> int:
        """+1 if the global normal points upward on this layer's flat disc."""
        return 1 if self.index % 2 == 1 else -1


def layer_specs(d: DerivedParams, top_rotation: str = "welded") -> list[LayerSpec]:
    """Per-layer data: disc height, rotation about z and attached bridges.

    ``top_rotation`` selects the rotation of the last layer: 'welded' uses
    N pi/m, which places its bridge on the axes of catenoid N-1; 'alternating'
    uses (N-1) pi/m.
    """
    N, m = d.N, d.m
    specs = []
    for i in range(1, N + 1):
        bridges = []
        if i < N:
            bridges.append(Bridge(+1, float(d.tau[i - 1]), float(d.hK[i - 1]), i))
        if 1 < i < N:
            bridges.append(Bridge(-1, float(d.tau[i - 2]), float(d.hK[i - 2]), i - 1))
        if i == N:
            bridges.append(Bridge(+1, float(d.tau[N - 2]), float(d.hK[N - 2]), N - 1))
            if top_rotation == "welded":
                rot = N * np.pi / m
            elif top_rotation == "alternating":
                rot = (N - 1) * np.pi / m
            else:
                raise ValueError(f"unknown top_rotation {top_rotation!r}")
        else:
            rot = (i - 1) * np.pi / m
        specs.append(LayerSpec(i, m, float(d.hB[i - 1]), rot, tuple(bridges)))
    return specs


def fold_theta(theta, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduce theta into [-pi/(2m), pi/(2m)] by the pyramidal reflections; returns (theta, reflected)."""
    period = 2 * np.pi / m
    half = np.pi / (2 * m)
    t = np.mod(np.asarray(theta, float) + half, period) - half  # in [-half, 3 half)
    reflected = t > half
    t = np.where(reflected, np.pi / m - t, t)
    return t, reflected


def _corner_distance(sigma: np.ndarray, theta: np.ndarray, side: int, m: int) -> np.ndarray:
    return np.hypot(sigma, theta - side * np.pi / (2 * m))


def height_jet(spec: LayerSpec, sigma, theta, check: bool = True) -> Jet:
    """Height omega and its first and second derivatives on the fundamental wedge.

    Derivatives are analytic; they blow up at the waist circle itself.
    """
    m = spec.m
    sigma = np.atleast_1d(np.asarray(sigma, float)).ravel()
    theta = np.atleast_1d(np.asarray(theta, float)).ravel()
    n = len(sigma)
    half = np.pi / (2 * m)
    if check and (np.any(sigma < -1e-12) or np.any(sigma > SIGMA_MAX + 1e-12) or np.any(np.abs(theta) > half * (1 + 1e-12))):
        raise DomainError("point outside the fundamental wedge")

    psi_sigma = _cutoff_of(Jet.linear(m * sigma, (m, 0.0)))
    q = spec.h_B / (1.0 - sigma)
    q_jet = Jet(q, np.column_stack([spec.h_B / (1 - sigma) ** 2, np.zeros(n)]), np.zeros((n, 2, 2)))
    q_jet.h[:, 0, 0] = 2 * spec.h_B / (1 - sigma) ** 3
    root = np.sqrt(1 - q * q)
    omega_B = q_jet.compose(np.arcsin(q), 1 / root, q / root**3)

    inner = Jet.constant(0.0, n)
    weight = Jet.constant(0.0, n)
    for b in spec.bridges:
        psi = _cutoff_of(Jet.linear(2.0 - b.side * 4 * m * theta / np.pi, (0.0, -b.side * 4 * m / np.pi)))
        active = psi.v > 0
        dist = _corner_distance(sigma, theta, b.side, m)
        if check and np.any(active & (dist < b.tau * (1 - 1e-12) - 1e-14)):
            raise DomainError(f"point inside the perforation of radius {b.tau:.3e} at the {'+' if b.side > 0 else '-'} corner")
        cat = Jet.constant(0.0, n)
        if np.any(active):
            sgn = 1.0 if spec.h_B - b.h_K >= 0 else -1.0
            dd = np.maximum(dist, b.tau)
            gap = np.sqrt(np.maximum((dd - b.tau) * (dd + b.tau), 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                f0 = b.tau * np.arccosh(dd / b.tau)
                f1 = b.tau / gap
                f2 = -b.tau * dd / gap**3
                nvec = np.column_stack([sigma, theta - b.side * half]) / dd[:, None]
                eye = np.eye(2)[None]
                outer = np.einsum("ni,nj->nij", nvec, nvec)
                hess = f2[:, None, None] * outer + (f1 / dd)[:, None, None] * (eye - outer)
                grad = f1[:, None] * nvec
            cat = Jet(b.h_K + sgn * f0, sgn * grad, sgn * hess)
            cat = Jet(np.where(active, cat.v, 0.0), np.where(active[:, None], cat.g, 0.0), np.where(active[:, None, None], cat.h, 0.0))
        inner = inner + psi * cat
        weight = weight + psi
    blended = inner + (1.0 - weight) * spec.h_B
    return psi_sigma * blended + (1.0 - psi_sigma) * omega_B


def _cutoff_analytic(x: np.ndarray) -> np.ndarray:
    """cutoff() extended to complex arguments near the real axis (for complex-step differentiation)."""
    x = np.asarray(x, dtype=complex)
    re = x.real
    out = np.where(re <= 1.0, 1.0 + 0j, 0.0 + 0j)
    mid = (re > 1.0) & (re < 2.0)
    xm = x[mid]
    a = np.exp(-1.0 / (2.0 - xm))
    b = np.exp(-1.0 / (xm - 1.0))
    out[mid] = a / (a + b)
    return out


def height_value(spec: LayerSpec, sigma, theta) -> np.ndarray:
    """Height omega evaluated directly from its definition; accepts complex (sigma, theta).

    This is the independent evaluation used by complex-step differentiation;
    height_jet carries analytic derivatives instead.
    """
    m = spec.m
    sigma = np.asarray(sigma, dtype=complex)
    theta = np.asarray(theta, dtype=complex)
    half = np.pi / (2 * m)
    psi_sigma = _cutoff_analytic(m * sigma)
    omega_B = np.arcsin(spec.h_B / (1.0 - sigma))
    inner = np.zeros_like(sigma)
    weight = np.zeros_like(sigma)
    for b in spec.bridges:
        psi = _cutoff_analytic(2.0 - b.side * 4 * m * theta / np.pi)
        dist = np.sqrt(sigma**2 + (theta - b.side * half) ** 2)
        sgn = 1.0 if spec.h_B - b.h_K >= 0 else -1.0
        ratio = dist / b.tau
        # arcosh through log keeps the principal branch for real part >= 1
        cat = b.h_K + sgn * b.tau * np.log(ratio + np.sqrt(ratio - 1.0) * np.sqrt(ratio + 1.0))
        inner = inner + np.where(psi != 0, psi * cat, 0.0)
        weight = weight + psi
    blended = inner + (1.0 - weight) * spec.h_B
    return psi_sigma * blended + (1.0 - psi_sigma) * omega_B


def height_function(spec: LayerSpec, sigma, theta) -> np.ndarray:
    """omega(sigma, theta) on the fundamental wedge of the given layer."""
    with np.errstate(divide="ignore", invalid="ignore"):
        val = height_jet(spec, sigma, theta).v
    return val if np.ndim(sigma) else float(val[0])


# ---------------------------------------------------------------- patch meshing


def _graded(a: float, b: float, first: float, largest: float, ratio: float = 1.3) -> np.ndarray:
    """Nodes from a to b with spacing starting at `first` and growing geometrically up to `largest`."""
    widths = []
    w, total = first, 0.0
    length = b - a
    while total < length - 1e-15 * length:
        widths.append(w)
        total += w
        w = min(w * ratio, largest)
    widths = np.asarray(widths) * (length / total)
    nodes = a + np.concatenate([[0.0], np.cumsum(widths)])
    nodes[-1] = b
    return nodes


def _uniform(a: float, b: float, spacing: float, minimum: int) -> np.ndarray:
    n = max(minimum, int(np.ceil((b - a) / spacing - 1e-9)))
    nodes = np.linspace(a, b, n + 1)
    nodes[0], nodes[-1] = a, b
    return nodes


@dataclass
class _Patch:
    sigma: np.ndarray
    theta: np.ndarray
    tris: np.ndarray
    corner: np.ndarray  # 0, +1, -1: which bridge's polar block the node came from
    ring: np.ndarray  # ring index in the polar block (0 = waist), -1 elsewhere
    ray: np.ndarray
    inward: np.ndarray  # for sigma = 0 nodes: index of the neighbour one step into the wedge


class _PatchBuilder:
    def __init__(self) -> None:
        self.keys: dict = {}
        self.sigma: list[float] = []
        self.theta: list[float] = []
        self.corner: list[int] = []
        self.ring: list[int] = []
        self.ray: list[int] = []
        self.tris: list[np.ndarray] = []
        self.inward: dict[int, int] = {}

    def node(self, s: float, t: float, key=None, corner: int = 0, ring: int = -1, ray: int = -1) -> int:
        key = ("xy", s, t) if key is None else key
        idx = self.keys.get(key)
        if idx is None:
            idx = len(self.sigma)
            self.keys[key] = idx
            self.sigma.append(s)
            self.theta.append(t)
            self.corner.append(corner)
            self.ring.append(ring)
            self.ray.append(ray)
        return idx

    def grid(self, sig: np.ndarray, th: np.ndarray) -> None:
        ids = np.array([[self.node(float(s), float(t)) for t in th] for s in sig])
        self._quads(ids)
        if sig[0] == 0.0:
            for k in range(len(th)):
                self.inward.setdefault(int(ids[0, k]), int(ids[1, k]))

    def _quads(self, ids: np.ndarray) -> None:
        a, b = ids[:-1, :-1].ravel(), ids[1:, :-1].ravel()
        c, d = ids[1:, 1:].ravel(), ids[:-1, 1:].ravel()
        self.tris.append(np.column_stack([a, b, c]))
        self.tris.append(np.column_stack([a, c, d]))

    def build(self) -> _Patch:
        tris = np.concatenate(self.tris)
        sig = np.array(self.sigma)
        th = np.array(self.theta)
        # orient every triangle counter-clockwise in (sigma, theta)
        p = np.column_stack([sig, th])
        e1 = p[tris[:, 1]] - p[tris[:, 0]]
        e2 = p[tris[:, 2]] - p[tris[:, 0]]
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        flip = cross < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]
        inward = -np.ones(len(sig), dtype=np.int64)
        for k, v in self.inward.items():
            inward[k] = v
        return _Patch(sig, th, tris, np.array(self.corner), np.array(self.ring), np.array(self.ray), inward)


@dataclass(frozen=True)
class MeshOptions:
    resolution: float
    block: float
    boundary_first: float = 5e-4
    ring_growth: float = 1.2
    min_block_cells: int = 8


def _build_patch(spec: LayerSpec, opts: MeshOptions) -> _Patch:
    m = spec.m
    half = np.pi / (2 * m)
    R = opts.block
    res = opts.resolution
    s_near = _graded(0.0, R, R * opts.boundary_first, min(res, R / opts.min_block_cells))
    th_block_hi = _uniform(half - R, half, min(res, R / opts.min_block_cells), opts.min_block_cells)
    th_block_lo = -th_block_hi[::-1]
    th_mid = _uniform(-half + R, half - R, res, 2)
    th_mid[0], th_mid[-1] = th_block_lo[-1], th_block_hi[0]
    th_all = np.concatenate([th_block_lo, th_mid[1:-1], th_block_hi])
    s_far = _graded(R, SIGMA_MAX, R / opts.min_block_cells, res, 1.2)

    pb = _PatchBuilder()
    pb.grid(s_near, th_mid)
    pb.grid(s_far, th_all)
    for side in (+1, -1):
        b = spec.bridge(side)
        th_block = th_block_hi if side > 0 else th_block_lo
        if b is None:
            pb.grid(s_near, th_block)
            continue
        corner_theta = side * half
        if b.tau >= R:
            raise RefinementError(f"waist radius {b.tau:.3e} does not fit the corner block of size {R:.3e}")
        # outer square boundary, from the mirror line (ray 0) to the sphere (last ray)
        along_side = th_block[::-1] if side > 0 else th_block
        outer = [(R, float(t)) for t in along_side]
        edge_theta = float(th_block[0] if side > 0 else th_block[-1])
        outer += [(float(s), edge_theta) for s in s_near[::-1][1:]]
        outer = np.array(outer)
        u = outer[:, 0]
        v = side * (corner_theta - outer[:, 1])
        radius = np.hypot(u, v)
        n_ring = max(4, int(np.ceil(np.log(radius.max() / b.tau) / np.log(opts.ring_growth))))
        ids = np.empty((len(outer), n_ring + 1), dtype=np.int64)
        for k in range(len(outer)):
            rho = b.tau * (radius[k] / b.tau) ** (np.arange(n_ring + 1) / n_ring)
            cu, cv = u[k] / radius[k], v[k] / radius[k]
            for j in range(n_ring + 1):
                if j == n_ring:
                    s, t = float(outer[k, 0]), float(outer[k, 1])
                    ids[k, j] = pb.node(s, t)
                    continue
                s = 0.0 if k == len(outer) - 1 else float(rho[j] * cu)
                t = corner_theta if k == 0 else float(corner_theta - side * rho[j] * cv)
                ids[k, j] = pb.node(s, t, key=("corner", side, k, j), corner=side, ring=j, ray=k)
        pb._quads(ids)
        last = len(outer) - 1
        for j in range(n_ring + 1):
            pb.inward[int(ids[last, j])] = int(ids[last - 1, j])
    return pb.build()


# ---------------------------------------------------------------- surface mesh


@dataclass
class SurfaceMesh:
    """Triangle mesh of an initial surface with per-vertex labels.

    Label arrays are per vertex: ``layer`` (1-based), ``kind`` (one of
    flat-disc, disc-graph, catenoid, intermediate), ``boundary``, ``sigma`` and
    ``theta_local`` (fundamental-wedge coordinates, NaN on the flat disc),
    ``omega``, ``bridge_side`` (0 away from the polar blocks), ``in_K``
    (within 1/(2m) of a catenoid axis) and ``rho``.
    """

    N: int
    m: int
    vertices: np.ndarray
    faces: np.ndarray
    normals: np.ndarray
    labels: dict
    specs: list
    derived: DerivedParams
    inward: np.ndarray
    waists_welded: int
    waists_expected: int
    face_layer: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def boundary_edges(self) -> np.ndarray:
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        key = np.sort(e, axis=1)
        uniq, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return uniq[counts == 1]

    def edge_face_counts(self) -> np.ndarray:
        e = np.sort(np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]), axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts


def _find_root(parent: np.ndarray) -> np.ndarray:
    while True:
        nxt = parent[parent]
        if np.array_equal(nxt, parent):
            return parent
        parent = nxt


def _union(parent: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    while True:
        parent = _find_root(parent)
        ra, rb = parent[a], parent[b]
        diff = ra != rb
        if not np.any(diff):
            return parent
        lo = np.minimum(ra[diff], rb[diff])
        hi = np.maximum(ra[diff], rb[diff])
        np.minimum.at(parent, hi, lo)


def default_resolution(m: int) -> float:
    return 1.0 / (4.0 * m)


def assemble_surface(
    p: StackingParams,
    resolution: float | None = None,
    top_rotation: str = "welded",
    boundary_first: float = 5e-4,
    ring_growth: float = 1.2,
) -> SurfaceMesh:
    """Mesh all N layers: graph patches mapped by Phi, replicated by pyr_m, plus flat inner discs.

    Vertices are identified by construction (mirror edges of the wedge copies
    and waist rings of adjacent layers) rather than by a distance weld, since
    waist radii can be far below any fixed weld tolerance.
    """
    d = derived_parameters(p)
    N, m = d.N, d.m
    res = default_resolution(m) if resolution is None else float(resolution)
    block = 1.0 / (2.0 * m)
    if res <= 0 or not np.isfinite(res):
        raise RefinementError("resolution must be a positive length")
    if np.min(d.tau) < 1e-13:
        raise RefinementError(f"waist radius {np.min(d.tau):.2e} is below what ambient double coordinates resolve")
    if np.max(np.abs(d.hB)) > 0.5 or np.max(np.abs(d.hK)) > 0.5:
        raise RefinementError("heights leave the Phi box; increase m")
    specs = layer_specs(d, top_rotation)
    opts = MeshOptions(res, block, boundary_first, ring_growth)
    half = np.pi / (2 * m)

    face_layer = []
    verts, faces, sig_l, th_l, om_l, layer_l, side_l, ring_l, ray_l, copy_l, inward_l = ([] for _ in range(11))
    patch_edges = []
    offset = 0
    waist_nodes = []  # (global index, axis slot, offset sign, ray, upper/lower catenoid index)
    for spec in specs:
        patch = _build_patch(spec, opts)
        n_p = len(patch.sigma)
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = height_jet(spec, patch.sigma, patch.theta).v
        # waist ring nodes sit exactly at h_K
        for b in spec.bridges:
            sel = (patch.corner == b.side) & (patch.ring == 0)
            omega[sel] = b.h_K
        plus_edge = np.isclose(patch.theta, half, rtol=0, atol=0) | (patch.theta == half)
        minus_edge = patch.theta == -half
        layer_start = offset
        for j in range(m):
            for refl in (0, 1):
                base = spec.rotation + 2 * np.pi * j / m
                theta_g = base + (np.pi / m - patch.theta if refl else patch.theta)
                pts = phi_map(patch.sigma, theta_g, omega)
                verts.append(pts)
                tri = patch.tris + offset
                flip = (spec.normal_sign > 0) != bool(refl)
                faces.append(tri[:, [0, 2, 1]] if flip else tri)
                face_layer.append(np.full(len(tri), spec.index))
                sig_l.append(patch.sigma)
                th_l.append(patch.theta)
                om_l.append(omega)
                layer_l.append(np.full(n_p, spec.index))
                side_l.append(patch.corner)
                ring_l.append(patch.ring)
                ray_l.append(patch.ray)
                copy_l.append(np.full(n_p, 2 * j + refl))
                inw = np.where(patch.inward >= 0, patch.inward + offset, -1)
                inward_l.append(inw)
                for b in spec.bridges:
                    sel = np.nonzero((patch.corner == b.side) & (patch.ring == 0))[0]
                    axis = base + (np.pi / m - b.side * half if refl else b.side * half)
                    slot = int(np.round(axis / half)) % (4 * m)
                    off_sign = np.sign(theta_g[sel] - axis).astype(int)
                    for idx, o, r in zip(sel, off_sign, patch.ray[sel]):
                        waist_nodes.append((idx + offset, slot, int(o), int(r), b.catenoid, spec.index))
                offset += n_p
        # mirror identifications within the layer
        n_copies = 2 * m
        starts = layer_start + n_p * np.arange(n_copies)
        pe = np.nonzero(plus_edge)[0]
        me = np.nonzero(minus_edge)[0]
        for j in range(m):
            a_copy, b_copy = starts[2 * j], starts[2 * j + 1]
            prev_b = starts[2 * ((j - 1) % m) + 1]
            patch_edges.append((a_copy + pe, b_copy + pe))
            patch_edges.append((a_copy + me, prev_b + me))

    vertices = np.concatenate(verts)
    faces = np.concatenate(faces)
    sigma = np.concatenate(sig_l)
    theta_loc = np.concatenate(th_l)
    omega = np.concatenate(om_l)
    layer = np.concatenate(layer_l)
    side = np.concatenate(side_l)
    ring = np.concatenate(ring_l)
    inward = np.concatenate(inward_l)
    parent = np.arange(len(vertices))
    pa = np.concatenate([e[0] for e in patch_edges])
    pb = np.concatenate([e[1] for e in patch_edges])
    parent = _union(parent, pa, pb)

    # waist rings: lower half (layer c) meets upper half (layer c + 1) of catenoid c
    waists_expected = (N - 1) * m
    key_lower, key_upper = {}, {}
    for idx, slot, o, r, cat, lay in waist_nodes:
        (key_lower if lay == cat else key_upper)[(cat, slot, o, r)] = idx
    wa, wb = [], []
    for key, idx in key_lower.items():
        other = key_upper.get(key)
        if other is not None:
            wa.append(idx)
            wb.append(other)
    if wa:
        parent = _union(parent, np.array(wa), np.array(wb))
    welded_slots = {(k[0], k[1]) for k in key_lower if k in key_upper}
    waists_welded = len(welded_slots)

    roots = _find_root(parent)
    uniq, new_index = np.unique(roots, return_inverse=True)
    faces = new_index[faces]
    keep = uniq  # representative original index for each merged vertex
    vertices = vertices[keep]
    sigma, theta_loc, omega, layer, side, ring = (arr[keep] for arr in (sigma, theta_loc, omega, layer, side, ring))
    inward = np.where(inward[keep] >= 0, new_index[np.maximum(inward[keep], 0)], -1)

    # flat inner discs
    disc_faces, disc_vertices, disc_layer = [], [], []
    n_before = len(vertices)
    for spec in specs:
        rim = np.nonzero((layer == spec.index) & (sigma == SIGMA_MAX))[0]
        rim_xy = vertices[rim, :2]
        radius = float(np.mean(np.hypot(rim_xy[:, 0], rim_xy[:, 1])))
        interior = _disc_points(radius, res, m)
        pts2 = np.concatenate([rim_xy, interior])
        tri = Delaunay(pts2).simplices
        ids = np.concatenate([rim, n_before + len(disc_layer) + np.arange(len(interior))])
        tri_ids = ids[tri]
        a2 = pts2[tri]
        cross = (a2[:, 1, 0] - a2[:, 0, 0]) * (a2[:, 2, 1] - a2[:, 0, 1]) - (a2[:, 1, 1] - a2[:, 0, 1]) * (a2[:, 2, 0] - a2[:, 0, 0])
        keep_tri = np.abs(cross) > 1e-14 * radius**2
        tri_ids = tri_ids[keep_tri]
        cross = cross[keep_tri]
        ccw = cross > 0
        tri_ids[~ccw] = tri_ids[~ccw][:, [0, 2, 1]]
        if spec.normal_sign < 0:
            tri_ids = tri_ids[:, [0, 2, 1]]
        disc_faces.append(tri_ids)
        face_layer.append(np.full(len(tri_ids), spec.index))
        disc_vertices.append(np.column_stack([interior, np.full(len(interior), spec.h_B)]))
        disc_layer.extend([spec.index] * len(interior))
    n_disc = len(disc_layer)
    vertices = np.concatenate([vertices] + disc_vertices)
    faces = np.concatenate([faces] + disc_faces)
    nan = np.full(n_disc, np.nan)
    sigma = np.concatenate([sigma, nan])
    theta_loc = np.concatenate([theta_loc, nan])
    omega = np.concatenate([omega, nan])
    layer = np.concatenate([layer, np.array(disc_layer, dtype=int)])
    side = np.concatenate([side, np.zeros(n_disc, dtype=int)])
    ring = np.concatenate([ring, -np.ones(n_disc, dtype=int)])
    inward = np.concatenate([inward, -np.ones(n_disc, dtype=int)])

    labels = _label_vertices(specs, d, sigma, theta_loc, layer, side)
    labels.update(omega=omega, ring=ring)
    normals = vertex_normals(vertices, faces)
    return SurfaceMesh(
        N=N,
        m=m,
        vertices=vertices,
        faces=faces,
        normals=normals,
        labels=labels,
        specs=specs,
        derived=d,
        inward=inward,
        waists_welded=waists_welded,
        waists_expected=waists_expected,
        face_layer=np.concatenate(face_layer),
        meta={"resolution": res, "block": block, "top_rotation": top_rotation},
    )


def _disc_points(radius: float, spacing: float, m: int) -> np.ndarray:
    """Polar sample of the open disc invariant under the prismatic group of order parameter m."""
    pts = [np.zeros((1, 2))]
    n_rings = max(1, int(np.ceil(radius / spacing)))
    for k in range(1, n_rings):
        r = radius * k / n_rings
        n = 2 * m * max(1, int(np.ceil(2 * np.pi * r / (spacing * 2 * m))))
        ang = np.pi / (2 * m) + 2 * np.pi * np.arange(n) / n
        pts.append(r * np.column_stack([np.cos(ang), np.sin(ang)]))
    return np.concatenate(pts)


def _label_vertices(specs, d: DerivedParams, sigma, theta_loc, layer, side) -> dict:
    m = d.m
    n = len(sigma)
    kind = np.empty(n, dtype=object)
    flat = np.isnan(sigma)
    kind[flat] = "flat-disc"
    dist = np.full(n, np.inf)
    tau = np.full(n, np.nan)
    t_coord = np.full(n, np.nan)
    vartheta = np.full(n, np.nan)
    bridge_side = np.zeros(n, dtype=int)
    catenoid = np.zeros(n, dtype=int)
    half = np.pi / (2 * m)
    for spec in specs:
        sel = (layer == spec.index) & ~flat
        for b in spec.bridges:
            dd = _corner_distance(sigma[sel], theta_loc[sel], b.side, m)
            idx = np.nonzero(sel)[0]
            closer = dd < dist[idx]
            idx = idx[closer]
            dist[idx] = dd[closer]
            tau[idx] = b.tau
            bridge_side[idx] = b.side
            catenoid[idx] = b.catenoid
            sgn = 1.0 if spec.h_B - b.h_K >= 0 else -1.0
            ratio = np.maximum(dd[closer] / b.tau, 1.0)
            t_coord[idx] = sgn * np.arccosh(ratio)
            vartheta[idx] = np.arctan2(theta_loc[idx] - b.side * half, sigma[idx])
    in_K = np.isfinite(dist) & (dist <= 1.0 / (2 * m) * (1 + 1e-12))
    graph = ~flat
    kind[graph & (sigma >= 3.0 / m)] = "disc-graph"
    kind[graph & (sigma < 3.0 / m)] = "intermediate"
    kind[graph & (dist <= float(m) ** -4)] = "catenoid"
    boundary = graph & (sigma == 0.0)
    rho = np.full(n, float(m))
    rho[graph] = rho_weight(dist[graph], m)
    return dict(
        layer=layer,
        kind=kind,
        boundary=boundary,
        sigma=sigma,
        theta_local=theta_loc,
        bridge_side=np.where(np.isfinite(dist), bridge_side, 0),
        catenoid=catenoid,
        axis_distance=dist,
        tau=tau,
        t=t_coord,
        vartheta=vartheta,
        in_K=in_K,
        rho=rho,
    )


def vertex_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Area-weighted vertex normals of an oriented mesh, normalized per vertex."""
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    fn = np.cross(b - a, c - a)
    # scale each face normal to unit length times a bounded weight so tiny and large faces both count
    length = np.linalg.norm(fn, axis=1)
    unit = np.divide(fn, length[:, None], out=np.zeros_like(fn), where=length[:, None] > 0)
    acc = np.zeros_like(vertices)
    for k in range(3):
        np.add.at(acc, faces[:, k], unit)
    norm = np.linalg.norm(acc, axis=1)
    return np.divide(acc, norm[:, None], out=np.zeros_like(acc), where=norm[:, None] > 0)


# ---------------------------------------------------------------- weights and charts


def rho_weight(axis_distance, m: int) -> np.ndarray:
    """Conformal weight from the distance to the nearest catenoid axis (in Phi coordinates)."""
    d = np.asarray(axis_distance, dtype=float)
    md = m * d
    psi = cutoff(np.where(np.isfinite(md), md, 10.0))
    with np.errstate(divide="ignore"):
        inv = np.where(psi > 0, 1.0 / d, 0.0)
    return psi * inv + m * (1.0 - psi)


def rho_at(mesh: SurfaceMesh, index) -> np.ndarray:
    return mesh.labels["rho"][index]


def kappa_chart(i: int, t, vartheta, d: DerivedParams, ambient: bool = True) -> np.ndarray:
    """Catenoid chart of catenoid i, in Phi coordinates or mapped into the ball."""
    if not 1 <= i <= d.N - 1:
        raise DomainError(f"catenoid index {i} out of range")
    t = np.asarray(t, float)
    vartheta = np.asarray(vartheta, float)
    a = d.a[i - 1]
    if np.any(np.abs(t) > a * (1 + 1e-12)) or np.any(np.abs(vartheta) > np.pi / 2 * (1 + 1e-12)):
        raise DomainError("kappa chart defined for |t| <= a_i, |vartheta| <= pi/2")
    tau = d.tau[i - 1]
    sigma = tau * np.cosh(t) * np.cos(vartheta)
    theta = (-1) ** (i - 1) * np.pi / (2 * d.m) + tau * np.cosh(t) * np.sin(vartheta)
    omega = d.hK[i - 1] + tau * t
    if not ambient:
        return np.stack(np.broadcast_arrays(sigma, theta, omega), axis=-1)
    return phi_map(sigma, theta, omega)


def varpi_chart(points, m: int) -> np.ndarray:
    """Projection of ball points to the unit disc, the identity on {z = 0}."""
    p = np.asarray(points, float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r2 = x * x + y * y
    psi = cutoff(m / 5.0 * (1.0 - np.sqrt(r2)))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r2 > 0, np.sqrt(r2 / (r2 + z * z)), 1.0)
    denom = 1.0 - psi + psi * ratio
    return np.stack([x / denom, y / denom, np.zeros_like(x)], axis=-1)


def vbar_hat(x, y, m: int) -> np.ndarray:
    """The pyr_m-invariant extension of psi_sigma (psi_+ - psi_-) to the unit disc."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    r = np.hypot(x, y)
    sigma = 1.0 - r
    theta, _ = fold_theta(np.arctan2(y, x), m)
    shape = np.shape(sigma)
    s = np.ravel(sigma)
    t = np.ravel(theta)
    out = np.zeros_like(s)
    # psi_sigma is 1 for sigma <= 1/m, which also covers the thin shell outside the unit circle
    zone = s <= 2.0 / m
    psi_s = cutoff(m * s[zone])
    plus = cutoff(2.0 - 4 * m * t[zone] / np.pi)
    minus = cutoff(2.0 + 4 * m * t[zone] / np.pi)
    out[zone] = psi_s * (plus - minus)
    return out.reshape(shape)


def _laplacian_vbar(x, y, m: int, step: float | None = None) -> np.ndarray:
    h = 1e-3 / m if step is None else step
    c = vbar_hat(x, y, m)
    return (vbar_hat(x + h, y, m) + vbar_hat(x - h, y, m) + vbar_hat(x, y + h, m) + vbar_hat(x, y - h, m) - 4 * c) / (h * h)


def cokernel_w(i: int, mesh: SurfaceMesh) -> np.ndarray:
    """w_i at every vertex: (-1)^(i-1) Psi(2m |sigma - 3/m|) on layer i, zero elsewhere."""
    m = mesh.m
    lab = mesh.labels
    sigma = lab["sigma"]
    out = np.zeros(mesh.n_vertices)
    sel = (lab["layer"] == i) & np.isfinite(sigma)
    out[sel] = (-1) ** (i - 1) * cutoff(2 * m * np.abs(sigma[sel] - 3.0 / m))
    return out


def cokernel_wbar(i: int, mesh: SurfaceMesh, step: float | None = None) -> np.ndarray:
    """wbar_i at every vertex: rho^-2 times the planar Laplacian of vbar_hat, pulled back by varpi."""
    m = mesh.m
    lab = mesh.labels
    out = np.zeros(mesh.n_vertices)
    sel = lab["layer"] == i
    proj = varpi_chart(mesh.vertices[sel], m)
    lap = _laplacian_vbar(proj[:, 0], proj[:, 1], m, step)
    out[sel] = lap / lab["rho"][sel] ** 2
    return out


# ---------------------------------------------------------------- export


def export_obj(mesh: SurfaceMesh, path) -> Path:
    """Write an ASCII OBJ with normals, plus a sidecar JSON of labels next to it."""
    if mesh.n_vertices == 0 or len(mesh.faces) == 0:
        raise ValueError("cannot export an empty mesh")
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# stacking N={mesh.N} m={mesh.m}\n")
        np.savetxt(fh, mesh.vertices, fmt="v %.17g %.17g %.17g")
        np.savetxt(fh, mesh.normals, fmt="vn %.17g %.17g %.17g")
        f1 = mesh.faces + 1
        np.savetxt(fh, np.column_stack([f1[:, 0], f1[:, 0], f1[:, 1], f1[:, 1], f1[:, 2], f1[:, 2]]), fmt="f %d//%d %d//%d %d//%d")
    sidecar = path.with_suffix(".labels.json")
    lab = mesh.labels
    payload = {
        "N": mesh.N,
        "m": mesh.m,
        "layer": lab["layer"].tolist(),
        "kind": [str(k) for k in lab["kind"]],
        "boundary": lab["boundary"].astype(int).tolist(),
        "rho": [float(r) for r in lab["rho"]],
    }
    sidecar.write_text(json.dumps(payload, sort_keys=True))
    return path


def read_obj(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    vs, vn, fs = [], [], []
    with Path(path).open() as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vs.append([float(x) for x in parts[1:4]])
            elif parts[0] == "vn":
                vn.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                fs.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(vs), np.array(vn), np.array(fs, dtype=int)


def export_report(mesh: SurfaceMesh, path) -> Path:
    kinds, counts = np.unique(mesh.labels["kind"].astype(str), return_counts=True)
    payload = {
        "N": mesh.N,
        "m": mesh.m,
        "vertices": int(mesh.n_vertices),
        "faces": int(len(mesh.faces)),
        "boundary_vertices": int(mesh.labels["boundary"].sum()),
        "kinds": {str(k): int(c) for k, c in zip(kinds, counts)},
        "waists_welded": mesh.waists_welded,
        "waists_expected": mesh.waists_expected,
        "meta": mesh.meta,
    }
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    return path


def export_patch_csv(mesh: SurfaceMesh, path) -> Path:
    """(layer, sigma, theta, omega) samples of the graph patches."""
    lab = mesh.labels
    sel = np.isfinite(lab["sigma"])
    data = np.column_stack([lab["layer"][sel], lab["sigma"][sel], lab["theta_local"][sel], lab["omega"][sel]])
    path = Path(path)
    np.savetxt(path, data, delimiter=",", header="layer,sigma,theta,omega", comments="", fmt=["%d", "%.17g", "%.17g", "%.17g"])
    return path


# ---------------------------------------------------------------- audits


def conormal_audit(mesh: SurfaceMesh) -> np.ndarray:
    """Angle (radians) between the discrete outward conormal and the radial direction at boundary vertices.

    The conormal is the edge from the structured inward neighbour, with its
    component along the boundary curve removed.
    """
    bd = np.nonzero(mesh.labels["boundary"])[0]
    if np.any(mesh.inward[bd] < 0):
        raise ValueError("boundary vertex without an inward neighbour")
    edges = mesh.boundary_edges()
    nbrs: dict[int, list[int]] = {}
    for a, b in edges:
        nbrs.setdefault(int(a), []).append(int(b))
        nbrs.setdefault(int(b), []).append(int(a))
    P = mesh.vertices
    angles = np.empty(len(bd))
    for k, v in enumerate(bd):
        nb = nbrs[int(v)]
        ahead = P[nb[0]] - P[v]
        behind = P[v] - P[nb[-1]]
        la, lb = np.linalg.norm(ahead), np.linalg.norm(behind)
        # length-weighted average of the one-sided chords is second-order accurate on uneven spacing
        tangent = (lb * ahead / la + la * behind / lb) / (la + lb)
        tangent /= np.linalg.norm(tangent)
        eta = P[v] - P[mesh.inward[v]]
        eta -= (eta @ tangent) * tangent
        eta /= np.linalg.norm(eta)
        radial = P[v] / np.linalg.norm(P[v])
        angles[k] = np.arccos(np.clip(eta @ radial, -1.0, 1.0))
    return angles


def orbit_audit(mesh: SurfaceMesh, group=None) -> float:
    """Largest distance from an image of a vertex under the stacking group to the nearest vertex."""
    from scipy.spatial import cKDTree

    from .symgroup import stacking_group

    group = stacking_group(mesh.N, mesh.m) if group is None else group
    tree = cKDTree(mesh.vertices)
    worst = 0.0
    for g in group.elements:
        dist, _ = tree.query(g.apply(mesh.vertices))
        worst = max(worst, float(dist.max()))
    return worst


def _segment_hits(p0, p1, a, b, c, eps: float = 1e-12) -> np.ndarray:
    """Vectorized Moller-Trumbore test of segments p0->p1 against closed triangles abc."""
    d = p1 - p0
    e1 = b - a
    e2 = c - a
    pv = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pv)
    scale = np.linalg.norm(d, axis=1) * np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    ok = np.abs(det) > eps * scale
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tv = p0 - a
    u = np.einsum("ij,ij->i", tv, pv) * inv
    qv = np.cross(tv, e1)
    v = np.einsum("ij,ij->i", d, qv) * inv
    t = np.einsum("ij,ij->i", e2, qv) * inv
    # closed test: a crossing through a triangle edge still counts, since meshes
    # of different layers share projected edges and a strict test would miss it
    tol = 1e-9
    return ok & (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)


def self_intersections(mesh: SurfaceMesh) -> int:
    """Number of (edge, triangle) pairs from different layers that cross, ignoring pairs sharing a vertex.

    Each layer is a graph over a planar domain through Phi and so cannot meet
    itself; only pairs of distinct layers are probed.
    """
    from scipy.spatial import cKDTree

    P = mesh.vertices
    F = mesh.faces
    tri = P[F]
    centroid = tri.mean(axis=1)
    radius = np.max(np.linalg.norm(tri - centroid[:, None, :], axis=2), axis=1)
    all_edges = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    edge_layer_all = np.tile(mesh.face_layer, 3)
    edges, first = np.unique(all_edges, axis=0, return_index=True)
    edge_layer = edge_layer_all[first]
    mid = 0.5 * (P[edges[:, 0]] + P[edges[:, 1]])
    half_len = 0.5 * np.linalg.norm(P[edges[:, 1]] - P[edges[:, 0]], axis=1)
    # bucket both sides by size so tiny elements are only paired at tiny distances
    tri_level = np.floor(np.log2(np.maximum(radius, 1e-300))).astype(int)
    edge_level = np.floor(np.log2(np.maximum(half_len, 1e-300))).astype(int)
    tri_key = np.column_stack([mesh.face_layer, tri_level])
    edge_key = np.column_stack([edge_layer, edge_level])
    tri_groups = [(k, np.nonzero((tri_key == k).all(axis=1))[0]) for k in np.unique(tri_key, axis=0)]
    edge_groups = [(k, np.nonzero((edge_key == k).all(axis=1))[0]) for k in np.unique(edge_key, axis=0)]
    tri_trees = [cKDTree(centroid[ids]) for _, ids in tri_groups]
    edge_trees = [cKDTree(mid[ids]) for _, ids in edge_groups]
    hits = 0
    for (e_key, e_ids), e_tree in zip(edge_groups, edge_trees):
        for (t_key, t_ids), t_tree in zip(tri_groups, tri_trees):
            if e_key[0] == t_key[0]:
                continue
            reach = half_len[e_ids].max() + radius[t_ids].max()
            pairs = e_tree.sparse_distance_matrix(t_tree, reach, output_type="ndarray")
            if len(pairs) == 0:
                continue
            e_idx = e_ids[pairs["i"]]
            t_idx = t_ids[pairs["j"]]
            close = pairs["v"] <= half_len[e_idx] + radius[t_idx]
            e_idx, t_idx = e_idx[close], t_idx[close]
            ev = edges[e_idx]
            fv = F[t_idx]
            shared = (fv == ev[:, :1]).any(axis=1) | (fv == ev[:, 1:]).any(axis=1)
            ev, fv = ev[~shared], fv[~shared]
            hit = _segment_hits(P[ev[:, 0]], P[ev[:, 1]], P[fv[:, 0]], P[fv[:, 1]], P[fv[:, 2]])
            hits += int(hit.sum())
    return hits
