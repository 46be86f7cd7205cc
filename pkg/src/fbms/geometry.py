"""Fundamental forms, mean curvature, weighted norms and vertical forces on initial surfaces.

Surfaces are handled through charts into (sigma, theta, omega) coordinates,
where the ambient Euclidean metric reads

    g = d sigma^2 + (1 - sigma)^2 cos^2 omega d theta^2 + (1 - sigma)^2 d omega^2.

Two independent evaluators are provided: closed forms on catenoid and graph
regions (analytic derivatives), and a generic normal-field evaluator that
differentiates any chart numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .balance import DerivedParams, in_mirror_class
from .surface import (
    LayerSpec,
    SurfaceMesh,
    height_jet,
    height_value,
    layer_specs,
)

__all__ = [
    "ImmersionError",
    "MeshIntegrityError",
    "FundamentalForms",
    "Chart",
    "catenoid_chart",
    "graph_chart",
    "plane_chart",
    "euclidean_catenoid_chart",
    "forms_generic",
    "forms_catenoid",
    "forms_disc_graph",
    "catenoid_sup_norm",
    "mean_curvature_field",
    "disc_residual",
    "forces_in_mirror_class",
    "vertical_force",
    "vertical_forces",
    "weighted_sup_norm",
    "oracle_agreement",
    "export_field_csv",
]

FD_STEP = 1e-4
COMPLEX_STEP = 1e-30


class ImmersionError(ValueError):
    pass


class MeshIntegrityError(ValueError):
    pass


@dataclass
class FundamentalForms:
    """Batched forms at n points: g and A are (n, 2, 2), nu is the Euclidean unit normal (n, 3)."""

    g: np.ndarray
    A: np.ndarray
    nu: np.ndarray
    H: np.ndarray
    normA2: np.ndarray
    residuals: dict | None = None


def _finish(g: np.ndarray, A: np.ndarray, nu: np.ndarray, H: np.ndarray | None = None, residuals=None) -> FundamentalForms:
    det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2
    if np.any(~(det > 0)):
        raise ImmersionError("metric is degenerate at some sample point")
    ginv = np.empty_like(g)
    ginv[:, 0, 0] = g[:, 1, 1] / det
    ginv[:, 1, 1] = g[:, 0, 0] / det
    ginv[:, 0, 1] = ginv[:, 1, 0] = -g[:, 0, 1] / det
    if H is None:
        H = np.einsum("nij,nji->n", ginv, A)
    mixed = np.einsum("nij,njk->nik", ginv, A)
    normA2 = np.einsum("nij,nji->n", mixed, mixed)
    return FundamentalForms(g, A, nu, H, normA2, residuals)


# ---------------------------------------------------------------- charts


@dataclass
class Chart:
    """A map from parameters u (n, 2) to coordinates (n, 3).

    ``local`` must accept complex input. For the 'phi' metric its output is
    (sigma, theta - theta0, omega); for 'euclidean' it is (x, y, z).
    ``scale`` gives a per-point length below which the chart varies
    appreciably; finite-difference steps are fd_step times this length.
    ``orientation`` multiplies the cross-product normal to give the surface's
    global normal.
    """

    local: Callable[[np.ndarray], np.ndarray]
    metric: str = "phi"
    theta0: float = 0.0
    scale: Callable[[np.ndarray], np.ndarray] | None = None
    orientation: int = 1


def catenoid_chart(i: int, d: DerivedParams) -> Chart:
    """kappa_i without Phi, as a chart in (t, vartheta)."""
    tau = float(d.tau[i - 1])
    hK = float(d.hK[i - 1])
    theta0 = (-1) ** (i - 1) * np.pi / (2 * d.m)

    def local(u):
        t, vt = u[:, 0], u[:, 1]
        r = tau * np.cosh(t)
        return np.stack([r * np.cos(vt), r * np.sin(vt), hK + tau * t], axis=1)

    return Chart(local, "phi", theta0, None, (-1) ** i)


def graph_chart(spec: LayerSpec) -> Chart:
    """(sigma, theta) -> (sigma, theta, omega) over the fundamental wedge of a layer."""
    m = spec.m
    half = np.pi / (2 * m)

    def local(u):
        return np.stack([u[:, 0], u[:, 1], height_value(spec, u[:, 0], u[:, 1])], axis=1)

    def scale(u):
        length = np.full(len(u), 1.0)
        for b in spec.bridges:
            gap = np.hypot(u[:, 0], u[:, 1] - b.side * half) - b.tau
            length = np.minimum(length, m * gap)
        return np.maximum(length, 1e-12)

    return Chart(local, "phi", 0.0, scale, 1 if spec.index % 2 == 1 else -1)


def plane_chart(height: float) -> Chart:
    """The horizontal plane z = height in Euclidean coordinates."""

    def local(u):
        return np.stack([u[:, 0], u[:, 1], np.full(len(u), height, dtype=u.dtype)], axis=1)

    return Chart(local, "euclidean")


def euclidean_catenoid_chart(scale: float = 1.0) -> Chart:
    """The catenoid of waist radius `scale` about the z axis, in Euclidean coordinates."""

    def local(u):
        t, th = u[:, 0], u[:, 1]
        return scale * np.stack([np.cosh(t) * np.cos(th), np.cosh(t) * np.sin(th), t], axis=1)

    return Chart(local, "euclidean")


# ---------------------------------------------------------------- generic evaluator


def _metric_diag(coords: np.ndarray, metric: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal ambient metric and its sigma and omega derivatives, each (n, 3)."""
    n = len(coords)
    if metric == "euclidean":
        return np.ones((n, 3)), np.zeros((n, 3)), np.zeros((n, 3))
    s, w = coords[:, 0], coords[:, 2]
    one = 1.0 - s
    G = np.column_stack([np.ones(n), one**2 * np.cos(w) ** 2, one**2])
    dG_sigma = np.column_stack([np.zeros(n), -2 * one * np.cos(w) ** 2, -2 * one])
    dG_omega = np.column_stack([np.zeros(n), -(one**2) * np.sin(2 * w), np.zeros(n)])
    return G, dG_sigma, dG_omega


def _chart_jacobian(chart: Chart, u: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates (n, 3) and complex-step Jacobian (n, 3, 2)."""
    value = chart.local(u.astype(complex)).real
    jac = np.empty((len(u), 3, 2))
    for j in range(2):
        up = u.astype(complex)
        up[:, j] += 1j * h
        jac[:, :, j] = chart.local(up).imag / h[:, None]
    return value, jac


def _cross_normal(chart: Chart, u: np.ndarray, h: np.ndarray):
    coords, jac = _chart_jacobian(chart, u, h)
    a, b = jac[:, :, 0], jac[:, :, 1]
    covector = np.cross(a, b)
    G, dGs, dGw = _metric_diag(coords, chart.metric)
    return coords, jac, covector / G, (G, dGs, dGw)


def _power_of_two(x: np.ndarray) -> np.ndarray:
    return 2.0 ** np.round(np.log2(x))


def forms_generic(chart: Chart, points, fd_step: float = FD_STEP) -> FundamentalForms:
    """Forms from the normal-field identity

        -2 |nu| A(V, W) = (nu g)(V phi, W phi) + g(V phi, W nu) + g(W phi, V nu),

    with nu the metric cross product of the coordinate vectors. First
    derivatives of the chart use a complex step; derivatives of nu use
    Richardson-extrapolated central differences at fd_step.
    """
    u = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(u)
    length = np.ones(n) if chart.scale is None else chart.scale(u)
    step = _power_of_two(fd_step * length)
    hc = COMPLEX_STEP * length
    coords, jac, nu, (G, dGs, dGw) = _cross_normal(chart, u, hc)
    if np.any(np.linalg.norm(np.cross(jac[:, :, 0], jac[:, :, 1]), axis=1) == 0):
        raise ImmersionError("chart Jacobian has rank < 2")
    dnu = np.empty((n, 3, 2))
    for j in range(2):
        est = []
        for k in (1.0, 0.5):
            e = np.zeros((n, 2))
            e[:, j] = k * step
            plus = _cross_normal(chart, u + e, hc)[2]
            minus = _cross_normal(chart, u - e, hc)[2]
            est.append((plus - minus) / (2 * k * step[:, None]))
        dnu[:, :, j] = (4 * est[1] - est[0]) / 3
    nu_len = np.sqrt(np.einsum("ni,ni->n", G * nu, nu))
    lie = dGs * nu[:, :1] + dGw * nu[:, 2:3]  # diagonal of the componentwise normal derivative of g
    g = np.einsum("nij,ni,nik->njk", jac, G, jac)
    term1 = np.einsum("nij,ni,nik->njk", jac, lie, jac)
    term2 = np.einsum("nij,ni,nik->njk", jac, G, dnu)
    A = -(term1 + term2 + term2.transpose(0, 2, 1)) / (2 * nu_len[:, None, None]) * chart.orientation
    unit = nu / nu_len[:, None] * chart.orientation
    if chart.metric == "phi":
        unit = _phi_pushforward(coords, chart.theta0, unit)
    return _finish(g, A, unit)


def _phi_pushforward(coords: np.ndarray, theta0: float, vec: np.ndarray) -> np.ndarray:
    """Euclidean components of a (sigma, theta, omega) vector at the given coordinates."""
    s, th, w = coords[:, 0], coords[:, 1] + theta0, coords[:, 2]
    one = 1 - s
    d_sigma = -np.column_stack([np.cos(th) * np.cos(w), np.sin(th) * np.cos(w), np.sin(w)])
    d_theta = one[:, None] * np.column_stack([-np.sin(th) * np.cos(w), np.cos(th) * np.cos(w), np.zeros_like(w)])
    d_omega = one[:, None] * np.column_stack([-np.cos(th) * np.sin(w), -np.sin(th) * np.sin(w), np.cos(w)])
    return d_sigma * vec[:, :1] + d_theta * vec[:, 1:2] + d_omega * vec[:, 2:3]


# ---------------------------------------------------------------- closed forms


def forms_catenoid(i: int, t, vartheta, d: DerivedParams) -> FundamentalForms:
    """Closed-form metric and second fundamental form on K_i in (t, vartheta).

    Residuals: 'metric' is the largest entry of r^-2 kappa* g - (dt^2 + dvartheta^2),
    'twoff' is rho^-2 |A|^2 - 2 sech^2 t.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    vt = np.atleast_1d(np.asarray(vartheta, dtype=float))
    t, vt = np.broadcast_arrays(t, vt)
    tau = float(d.tau[i - 1])
    hK = float(d.hK[i - 1])
    sign = (-1) ** (i - 1)
    ch, sh, th = np.cosh(t), np.sinh(t), np.tanh(t)
    sech = 1.0 / ch
    c, s = np.cos(vt), np.sin(vt)
    s2v = np.sin(2 * vt)
    r = tau * ch
    sg = r * c
    om = hK + tau * t
    cw, sw, tw = np.cos(om), np.sin(om), np.tan(om)
    one = 1.0 - sg
    sig2 = sg * (2.0 - sg)
    Q = sig2 * cw**2 + sw**2
    # r^-2 kappa* g = I - E
    e_tt = sig2 * sech**2 + Q * th**2 * s**2
    e_tv = 0.5 * Q * th * s2v
    e_vv = Q * c**2
    nu_len = np.sqrt(1.0 + sech**2 * tw**2 * s**2 - sig2 * sech**2 * c**2)
    # (|nu| / tau) A = sign * [one * diag(1, -1) + tau * b]
    b_tt = (
        2 * sh * th * c**3
        - 2 * one * tw * th * s**2
        + one**2 * cw**2 * sh * th * s**2 * c
        + one**2 * sech * c
        - one * sw * cw * sh**2 * th * s**2
    )
    b_tv = 0.5 * (one**2 * cw**2 * sh * s2v * c - 2 * sh * s2v * c - one * tw * (cw**2 * sh**2 + 1) * s2v)
    b_vv = 2 * ch * s**2 * c + one**2 * cw**2 * ch * c**3 - one * sw * cw * sh * ch * c**2
    gt_tt, gt_tv, gt_vv = 1 - e_tt, -e_tv, 1 - e_vv
    B_tt = one + tau * b_tt
    B_tv = tau * b_tv
    B_vv = -one + tau * b_vv
    n = len(t)
    g = np.empty((n, 2, 2))
    g[:, 0, 0], g[:, 0, 1], g[:, 1, 0], g[:, 1, 1] = gt_tt, gt_tv, gt_tv, gt_vv
    g *= (r**2)[:, None, None]
    A = np.empty((n, 2, 2))
    A[:, 0, 0], A[:, 0, 1], A[:, 1, 0], A[:, 1, 1] = B_tt, B_tv, B_tv, B_vv
    A *= (sign * tau / nu_len)[:, None, None]
    # trace of adj(r^-2 g) B, expanded so the leading one*(1, -1) parts cancel exactly
    det_t = gt_tt * gt_vv - gt_tv**2
    trace = one * (e_tt - e_vv) + tau * (b_tt + b_vv) - tau * (e_vv * b_tt + e_tt * b_vv) - 2 * gt_tv * B_tv
    H = sign * tau * trace / (nu_len * det_t * r**2)
    # unit normal: the displayed nu field rescaled, oriented globally
    nu_vec = np.column_stack([one * sech * c, sech * s / (one * cw**2), -th / one]) / nu_len[:, None]
    theta0 = (-1) ** (i - 1) * np.pi / (2 * d.m)
    coords = np.column_stack([sg, r * s, om])
    unit = _phi_pushforward(coords, theta0, sign * nu_vec)
    forms = _finish(g, A, unit, H)
    metric_res = np.max(np.abs(np.stack([e_tt, e_tv, e_vv], axis=1)), axis=1)
    forms.residuals = {"metric": metric_res, "twoff": r**2 * forms.normA2 - 2 * sech**2}
    return forms


def forms_disc_graph(spec: LayerSpec, sigma, theta) -> FundamentalForms:
    """Closed-form metric and second fundamental form of the graph omega = h(sigma, theta) of a layer."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        jet = height_jet(spec, sigma, theta)
    h = jet.v
    hs, ht = jet.g[:, 0], jet.g[:, 1]
    hss, hst, htt = jet.h[:, 0, 0], jet.h[:, 0, 1], jet.h[:, 1, 1]
    one = 1.0 - sigma
    ch, th_ = np.cos(h), np.tan(h)
    n = len(sigma)
    g = np.empty((n, 2, 2))
    g[:, 0, 0] = 1 + one**2 * hs**2
    g[:, 0, 1] = g[:, 1, 0] = one**2 * hs * ht
    g[:, 1, 1] = one**2 * ch**2 + one**2 * ht**2
    nu_len = np.sqrt(1 + hs**2 + ht**2 - sigma * (2 - sigma) * hs**2 + ht**2 * th_**2)
    sign = (-1) ** spec.index
    A = np.empty((n, 2, 2))
    A[:, 0, 0] = -one * hss + 2 * hs + one**2 * hs**3
    A[:, 0, 1] = A[:, 1, 0] = -one * hst + one**2 * hs**2 * ht - one * hs * ht * th_
    A[:, 1, 1] = -one * htt + one**2 * hs * ch**2 - 0.5 * one * np.sin(2 * h) - 2 * one * ht**2 * th_ + one**2 * hs * ht**2
    A *= (sign / nu_len)[:, None, None]
    nu_vec = np.column_stack([one * hs, ht / (one * ch**2), -1 / one]) / nu_len[:, None]
    unit = _phi_pushforward(np.column_stack([sigma, theta, h]), 0.0, sign * nu_vec)
    return _finish(g, A, unit)


# ---------------------------------------------------------------- sampled norms


def catenoid_sup_norm(d: DerivedParams, R: float | None = None, n_t: int = 401, n_vartheta: int = 181) -> float:
    """sup of rho^-1 |H| over the catenoidal regions K_i(R), sampled on a (t, vartheta) grid.

    R defaults to 1/(2m), the full chart |t| <= a_i. On K_i rho = sech(t) / tau_i,
    so rho^-1 |H| = tau_i cosh(t) |H|.
    """
    R = 1.0 / (2 * d.m) if R is None else R
    worst = 0.0
    for i in range(1, d.N):
        tau = float(d.tau[i - 1])
        if R <= tau:
            continue
        t_max = np.arccosh(R / tau)
        t, vt = np.meshgrid(np.linspace(-t_max, t_max, n_t), np.linspace(-np.pi / 2, np.pi / 2, n_vartheta))
        forms = forms_catenoid(i, t.ravel(), vt.ravel(), d)
        worst = max(worst, float(np.max(tau * np.cosh(t.ravel()) * np.abs(forms.H))))
    return worst


def weighted_sup_norm(field, beta: float, rho, m: int) -> float:
    """sup of m^-beta rho^beta |u| (the C^0 part of the weighted norms)."""
    u = np.asarray(field, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if u.size == 0:
        return 0.0
    return float(np.max(m ** (-beta) * rho**beta * np.abs(u)))


# ---------------------------------------------------------------- mesh fields


def _catenoid_coordinates(mesh: SurfaceMesh, idx: np.ndarray):
    """(catenoid index, t, vartheta) for graph vertices near a bridge, in that catenoid's chart."""
    lab = mesh.labels
    return lab["catenoid"][idx], lab["t"][idx], lab["vartheta"][idx]


def mean_curvature_field(mesh: SurfaceMesh, specs: list[LayerSpec] | None = None) -> dict:
    """Per-vertex H with the evaluator suited to each vertex, plus region sup norms.

    Vertices within pi/(4m) of a catenoid axis lie where the surface is exactly
    the catenoid and use the catenoid closed form; other graph vertices use the
    graph closed form; flat-disc vertices have H = 0.
    """
    d = mesh.derived
    m = mesh.m
    lab = mesh.labels
    specs = mesh.specs if specs is None else specs
    H = np.zeros(mesh.n_vertices)
    graph = np.isfinite(lab["sigma"])
    near = graph & (lab["axis_distance"] <= np.pi / (4 * m))
    for i in range(1, d.N):
        idx = np.nonzero(near & (lab["catenoid"] == i))[0]
        if len(idx):
            _, t, vt = _catenoid_coordinates(mesh, idx)
            H[idx] = forms_catenoid(i, t, vt, d).H
    for spec in specs:
        idx = np.nonzero(graph & ~near & (lab["layer"] == spec.index))[0]
        if len(idx):
            H[idx] = forms_disc_graph(spec, lab["sigma"][idx], lab["theta_local"][idx]).H
    rho = lab["rho"]
    cat = lab["kind"] == "catenoid"
    result = {
        "H": H,
        "sup_catenoid_rho2": float(np.max(np.abs(H[cat]) / rho[cat] ** 2)) if np.any(cat) else 0.0,
        "sup_catenoid_rho1": float(np.max(np.abs(H[cat]) / rho[cat])) if np.any(cat) else 0.0,
    }
    return result


def disc_residual(mesh: SurfaceMesh, H: np.ndarray | None = None) -> dict:
    """Sup of rho^-2 |H| and of rho^-2 |H - rho^2 d_i wbar_i| over each layer's graph region outside K_i."""
    from .surface import cokernel_wbar

    d = mesh.derived
    lab = mesh.labels
    H = mean_curvature_field(mesh)["H"] if H is None else H
    before, after = 0.0, 0.0
    region = np.isfinite(lab["sigma"]) & ~lab["in_K"]
    for i in range(1, d.N + 1):
        sel = region & (lab["layer"] == i)
        wbar = cokernel_wbar(i, mesh)
        rho2 = lab["rho"][sel] ** 2
        corrected = H[sel] - rho2 * d.disloc[i - 1] * wbar[sel]
        before = max(before, float(np.max(np.abs(H[sel]) / rho2)))
        after = max(after, float(np.max(np.abs(corrected) / rho2)))
    return {"before": before, "after": after}


def vertical_force(mesh: SurfaceMesh, i: int) -> float:
    """Integral over the boundary of layer i of the z component of its outward conormal.

    On the sphere the conormal is the position vector (the boundary is met
    orthogonally); on a waist circle it is the catenoid's axial direction
    d/d omega, pointing away from the layer. Lengths come from mesh edges.
    """
    F = mesh.faces[mesh.face_layer == i]
    if len(F) == 0:
        raise MeshIntegrityError(f"layer {i} has no faces")
    e = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    bnd = uniq[counts == 1]
    degree = np.bincount(bnd.ravel(), minlength=mesh.n_vertices)
    if np.any((degree != 0) & (degree != 2)):
        raise MeshIntegrityError(f"boundary of layer {i} is not a union of closed loops")
    P = mesh.vertices
    lab = mesh.labels
    a, b = bnd[:, 0], bnd[:, 1]
    length = np.linalg.norm(P[b] - P[a], axis=1)
    on_sphere = lab["boundary"][a] & lab["boundary"][b]
    waist = (lab["ring"][a] == 0) & (lab["ring"][b] == 0) & ~on_sphere
    if np.any(~(on_sphere | waist)):
        raise MeshIntegrityError(f"layer {i} has boundary edges off the sphere and the waists")
    total = float(np.sum(length[on_sphere] * 0.5 * (P[a[on_sphere], 2] + P[b[on_sphere], 2])))
    spec = mesh.specs[i - 1]
    for br in spec.bridges:
        # the layer lies below its waist exactly when its disc height is below the waist height
        direction = 1.0 if spec.h_B < br.h_K else -1.0
        sel = waist & (lab["catenoid"][a] == br.catenoid)
        total += direction * np.cos(br.h_K) * float(np.sum(length[sel]))
    return total


def vertical_forces(mesh: SurfaceMesh) -> np.ndarray:
    return np.array([vertical_force(mesh, i) for i in range(1, mesh.N + 1)])


def forces_in_mirror_class(F: np.ndarray, tol: float) -> bool:
    return in_mirror_class(np.asarray(F, dtype=float), -1, tol)


# ---------------------------------------------------------------- oracle agreement


def _sample_graph_points(spec: LayerSpec, rng, n: int, lo: float, hi: float, min_distance: float):
    m = spec.m
    half = np.pi / (2 * m)
    out_s, out_t = [], []
    while sum(len(x) for x in out_s) < n:
        s = rng.uniform(lo, hi, 4 * n)
        t = rng.uniform(-half, half, 4 * n)
        ok = np.ones(len(s), dtype=bool)
        for b in spec.bridges:
            ok &= np.hypot(s, t - b.side * half) > max(min_distance, 2 * b.tau)
        out_s.append(s[ok])
        out_t.append(t[ok])
    return np.concatenate(out_s)[:n], np.concatenate(out_t)[:n]


def oracle_agreement(d: DerivedParams, n_points: int = 500, seed: int = 0, fd_step: float = FD_STEP) -> dict:
    """Largest |H_closed - H_generic| per region over seeded random samples.

    Regions: 'catenoid' samples the K_i charts, 'intermediate' the graph band
    sigma < 3/m outside K_i(m^-4), 'disc-graph' the band sigma >= 3/m.
    """
    rng = np.random.default_rng(seed)
    m = d.m
    specs = layer_specs(d)
    out = {}
    # catenoid charts
    per = [n_points // (d.N - 1) + (1 if k < n_points % (d.N - 1) else 0) for k in range(d.N - 1)]
    worst = 0.0
    for i, count in zip(range(1, d.N), per):
        a = float(d.a[i - 1])
        u = np.column_stack([rng.uniform(-a, a, count), rng.uniform(-np.pi / 2, np.pi / 2, count)])
        closed = forms_catenoid(i, u[:, 0], u[:, 1], d)
        generic = forms_generic(catenoid_chart(i, d), u, fd_step)
        worst = max(worst, float(np.max(np.abs(closed.H - generic.H))))
    out["catenoid"] = worst
    for name, lo, hi in (("intermediate", 0.0, 3.0 / m), ("disc-graph", 3.0 / m, 1.0 / 3.0)):
        per = [n_points // d.N + (1 if k < n_points % d.N else 0) for k in range(d.N)]
        worst = 0.0
        for spec, count in zip(specs, per):
            s, t = _sample_graph_points(spec, rng, count, lo, hi, float(m) ** -4)
            closed = forms_disc_graph(spec, s, t)
            generic = forms_generic(graph_chart(spec), np.column_stack([s, t]), fd_step)
            worst = max(worst, float(np.max(np.abs(closed.H - generic.H))))
        out[name] = worst
    return out


def export_field_csv(mesh: SurfaceMesh, H: np.ndarray, normA2: np.ndarray | None, path) -> Path:
    """CSV of (vertex id, region, H, |A|^2, rho) per vertex."""
    path = Path(path)
    lab = mesh.labels
    normA2 = np.full(mesh.n_vertices, np.nan) if normA2 is None else normA2
    with path.open("w") as fh:
        fh.write("vertex,region,H,normA2,rho\n")
        for k in range(mesh.n_vertices):
            fh.write(f"{k},{lab['kind'][k]},{H[k]:.17g},{normA2[k]:.17g},{lab['rho'][k]:.17g}\n")
    return path
