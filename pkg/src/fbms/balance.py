"""Parameter chain of an N-layer stacking.

Given (N, m, zeta, xi) this module computes the limiting waist ratios, the
waist radii, the catenoid heights and disc heights, the leading-order vertical
forces, and the linear map that controls forces and dislocations.

Indices in docstrings are 1-based, as in the usual layer numbering; arrays
are 0-based, so ``x[i - 1]`` holds x_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MTooSmallError",
    "CokerSingularError",
    "StackingParams",
    "DerivedParams",
    "CokerMap",
    "mirror_project",
    "mirror_basis",
    "in_mirror_class",
    "balancing_coefficient",
    "limiting_waist_ratios",
    "closed_form_waist_ratios",
    "derived_parameters",
    "coker_map",
    "predicted_forces",
    "safe_arcosh",
]

SYMMETRY_TOL = 1e-12
ARCOSH_GUARD = 1e-12


class MTooSmallError(ValueError):
    pass


class CokerSingularError(RuntimeError):
    pass


def mirror_project(v: np.ndarray, sign: int) -> np.ndarray:
    """Orthogonal projection onto {v_i = sign * v_(d+1-i)}."""
    v = np.asarray(v, dtype=float)
    return 0.5 * (v + sign * v[::-1])


def in_mirror_class(v: np.ndarray, sign: int, tol: float = SYMMETRY_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.abs(v - sign * v[::-1]) <= tol * max(1.0, np.max(np.abs(v), initial=0.0))))


def mirror_basis(d: int, sign: int, zero_ends: bool = False) -> np.ndarray:
    """Orthonormal basis (columns) of the mirror class in R^d, optionally with v_1 = v_d = 0."""
    cols = []
    for i in range(d):
        j = d - 1 - i
        if j < i:
            break
        if zero_ends and i == 0:
            continue
        e = np.zeros(d)
        if i == j:
            if sign < 0:
                continue
            e[i] = 1.0
        else:
            e[i] = 1.0
            e[j] = float(sign)
            e /= np.sqrt(2.0)
        cols.append(e)
    if not cols:
        return np.zeros((d, 0))
    return np.stack(cols, axis=1)


def safe_arcosh(y: float, what: str = "") -> float:
    """log(y + sqrt(y^2 - 1)), refusing arguments below 1 + 1e-12."""
    if not np.isfinite(y) or y < 1.0 + ARCOSH_GUARD:
        raise MTooSmallError(f"arcosh argument {y!r} below 1 {what}".rstrip())
    return float(np.log(y + np.sqrt(y * y - 1.0)))


@dataclass(frozen=True)
class StackingParams:
    N: int
    m: int
    zeta: np.ndarray | None = None
    xi: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"need N >= 2, got {self.N}")
        if self.m < 3:
            raise ValueError(f"need m >= 3, got {self.m}")
        for name, sign in (("zeta", 1), ("xi", -1)):
            raw = getattr(self, name)
            vec = np.zeros(self.N - 1) if raw is None else np.array(raw, dtype=float).reshape(-1)
            if vec.shape != (self.N - 1,):
                raise ValueError(f"{name} must have length N - 1 = {self.N - 1}")
            if not in_mirror_class(vec, sign):
                raise ValueError(f"{name} must satisfy v_i = {'+' if sign > 0 else '-'}v_(N-i)")
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)

    @property
    def n(self) -> int:
        return self.N // 2


@dataclass(frozen=True)
class DerivedParams:
    N: int
    m: int
    n: int
    x: np.ndarray
    lam: float
    taubar: np.ndarray
    tau: np.ndarray
    a: np.ndarray
    delta_hK: np.ndarray
    disloc: np.ndarray
    hK: np.ndarray
    hB: np.ndarray
    matching_residual: float = field(default=0.0)

    def tau_ext(self) -> np.ndarray:
        """tau padded with tau_0 = tau_N = 0."""
        return np.concatenate([[0.0], self.tau, [0.0]])


def closed_form_waist_ratios(N: int) -> tuple[np.ndarray, float]:
    n = N // 2
    j = np.arange(1, N)
    x = np.sin(j * np.pi / N) / np.sin(n * np.pi / N)
    return x, 2.0 * np.cos(np.pi / N)


def balancing_coefficient(x: np.ndarray, N: int) -> float:
    """2 (x_(n-1) + N mod 2) / (1 + N mod 2), with x_0 = 0."""
    n = N // 2
    x_prev = x[n - 2] if n >= 2 else 0.0
    parity = N % 2
    return 2.0 * (x_prev + parity) / (1 + parity)


def path_adjacency(d: int) -> np.ndarray:
    return np.eye(d, k=1) + np.eye(d, k=-1)


def limiting_waist_ratios(N: int, tol: float = 1e-14, max_iter: int = 100_000) -> tuple[np.ndarray, float]:
    """Perron vector of the path adjacency matrix, normalized so x_n = 1.

    Computed by power iteration on I + B and checked against the sine closed form.
    """
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    d = N - 1
    n = N // 2
    B = path_adjacency(d)
    shifted = np.eye(d) + B
    v = np.ones(d) / np.sqrt(d)
    for _ in range(max_iter):
        w = shifted @ v
        w /= np.linalg.norm(w)
        if np.max(np.abs(w - v)) < tol:
            v = w
            break
        v = w
    else:
        raise RuntimeError("power iteration did not converge")
    lam = float(v @ B @ v)
    x = v / v[n - 1]
    x_ref, lam_ref = closed_form_waist_ratios(N)
    if np.max(np.abs(x - x_ref)) > 1e-10 or abs(lam - lam_ref) > 1e-10:
        raise RuntimeError(f"Perron vector for N={N} disagrees with the closed form")
    return x, lam


def derived_parameters(p: StackingParams, x: np.ndarray | None = None) -> DerivedParams:
    """Waist radii, extents, dislocations and heights for the given data."""
    N, m, n = p.N, p.m, p.n
    if x is None:
        x, lam = limiting_waist_ratios(N)
    else:
        lam = float(np.max(np.linalg.eigvalsh(path_adjacency(N - 1))))
    x_prev = x[n - 2] if n >= 2 else 0.0
    exponent = (x_prev - 1.0) / (1 + N % 2) * (m / 2.0)
    taubar = x / m * np.exp(exponent)
    zeta, xi = p.zeta, p.xi
    tau = taubar * np.exp(zeta[n - 1] + zeta / m)

    delta_hK = np.empty(N - 1)
    a = np.empty(N - 1)
    for i in range(N - 1):
        delta_hK[i] = 2.0 * tau[i] * safe_arcosh(1.0 / (m * tau[i]), f"at catenoid i={i + 1}: m={m} too small")
        a[i] = safe_arcosh(1.0 / (2.0 * m * tau[i]), f"at catenoid i={i + 1}: m={m} too small")

    disloc = np.zeros(N)
    for i in range(2, N):
        disloc[i - 1] = 0.5 * (xi[i - 1] - xi[i - 2]) * tau[n - 1]

    hK = np.zeros(N - 1)
    hB = np.zeros(N)
    half = 0.5 * delta_hK
    if N % 2 == 0:
        hK[n - 1] = 0.0
        hB[n - 1] = hK[n - 1] - half[n - 1] - disloc[n - 1]
        hB[n] = hK[n - 1] + half[n - 1] + disloc[n]
        up_start, down_start = n + 1, n
    else:
        hB[n] = 0.0
        up_start, down_start = n + 1, n + 1
    # upward: layer i (1-based) known, fill hK_i then hB_(i+1)
    for i in range(up_start, N):
        hK[i - 1] = hB[i - 1] + half[i - 1] + disloc[i - 1]
        hB[i] = hK[i - 1] + half[i - 1] + disloc[i]
    # downward: layer i known, fill hK_(i-1) then hB_(i-1)
    for i in range(down_start, 1, -1):
        hK[i - 2] = hB[i - 1] - half[i - 2] - disloc[i - 1]
        hB[i - 2] = hK[i - 2] - half[i - 2] - disloc[i - 2]

    res1 = hK - hB[:-1] - half - disloc[:-1]
    res2 = hB[1:] - hK - half - disloc[1:]
    residual = float(max(np.max(np.abs(res1)), np.max(np.abs(res2))))

    arrays = dict(x=x, taubar=taubar, tau=tau, a=a, delta_hK=delta_hK, disloc=disloc, hK=hK, hB=hB)
    for arr in arrays.values():
        arr.setflags(write=False)
    return DerivedParams(N=N, m=m, n=n, lam=lam, matching_residual=residual, **arrays)


def predicted_forces(d: DerivedParams) -> tuple[np.ndarray, np.ndarray]:
    """Leading-order vertical forces per layer and the normalized force differences.

    F_i = 2 pi hB_i + m pi tau_i - m pi tau_(i-1) with tau_0 = tau_N = 0, and
    Ftilde_i = ((F_(i+1) - F_i) - 2 (d_i + d_(i+1))) / (pi tau_n).
    """
    t = d.tau_ext()
    F = 2.0 * np.pi * d.hB + d.m * np.pi * t[1:] - d.m * np.pi * t[:-1]
    D = d.disloc
    Ftilde = ((F[1:] - F[:-1]) - 2.0 * (D[:-1] + D[1:])) / (np.pi * d.tau[d.n - 1])
    return F, Ftilde


def sum_matrix(N: int) -> np.ndarray:
    """S: R^N -> R^(N-1), (Sv)_i = v_i + v_(i+1)."""
    return np.eye(N - 1, N) + np.eye(N - 1, N, k=1)


def difference_matrix(d: int) -> np.ndarray:
    """T: R^(d+1) -> R^d, (Tv)_i = v_(i+1) - v_i."""
    return np.eye(d, d + 1, k=1) - np.eye(d, d + 1)


def padded_difference_matrix(d: int) -> np.ndarray:
    """T00: R^(d+1) -> R^(d+2), zero at both ends and v_i - v_(i-1) inside."""
    M = np.zeros((d + 2, d + 1))
    for i in range(2, d + 2):
        M[i - 1, i - 1] = 1.0
        M[i - 1, i - 2] = -1.0
    return M


def weighted_shift_matrix(x: np.ndarray) -> np.ndarray:
    """F: R^(N-2) -> R^(N-1), (Fv)_i = -x_(i-1) v_(i-1) + x_(i+1) v_i."""
    N = len(x) + 1
    xe = np.concatenate([[0.0], x, [0.0]])
    M = np.zeros((N - 1, N - 2))
    for i in range(1, N):
        if i - 1 >= 1:
            M[i - 1, i - 2] -= xe[i - 1]
        if i <= N - 2:
            M[i - 1, i - 1] += xe[i + 1]
    return M


@dataclass(frozen=True)
class CokerMap:
    N: int
    x: np.ndarray
    S: np.ndarray
    T: np.ndarray
    T00: np.ndarray
    F: np.ndarray
    domain_basis: tuple[np.ndarray, np.ndarray]
    target_basis: tuple[np.ndarray, np.ndarray]
    matrix: np.ndarray
    norm: float
    inverse_norm: float
    condition: float

    def apply(self, zeta: np.ndarray, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate P on full coordinate vectors, returning (force part in R^N, dislocation part in R^N)."""
        return _apply_p(self.N, self.x, np.asarray(zeta, float), np.asarray(xi, float), self.T, self.S, self.T00, self.F)


def _apply_p(N, x, zeta, xi, T_N, S, T00, F):
    n = N // 2
    T_small = difference_matrix(N - 2)
    rhs = np.pi * F @ (T_small @ zeta) - 4.0 * np.pi * zeta[n - 1] * x + S @ (T00 @ xi)
    odd_basis = mirror_basis(N, -1)
    coeffs, *_ = np.linalg.lstsq(T_N @ odd_basis, rhs, rcond=None)
    force_part = odd_basis @ coeffs
    return force_part, 0.5 * T00 @ xi


def coker_map(N: int, x: np.ndarray | None = None) -> CokerMap:
    """Matrix of the force/dislocation control map in orthonormal mirror bases."""
    if x is None:
        x, _ = limiting_waist_ratios(N)
    S = sum_matrix(N)
    T_N = difference_matrix(N - 1)
    T00 = padded_difference_matrix(N - 2)
    F = weighted_shift_matrix(x)
    dom_plus = mirror_basis(N - 1, +1)
    dom_minus = mirror_basis(N - 1, -1)
    tgt_force = mirror_basis(N, -1)
    tgt_disloc = mirror_basis(N, +1, zero_ends=True)
    cols = []
    for k in range(dom_plus.shape[1] + dom_minus.shape[1]):
        if k < dom_plus.shape[1]:
            zeta, xi = dom_plus[:, k], np.zeros(N - 1)
        else:
            zeta, xi = np.zeros(N - 1), dom_minus[:, k - dom_plus.shape[1]]
        fp, dp = _apply_p(N, x, zeta, xi, T_N, S, T00, F)
        if not in_mirror_class(fp, -1, 1e-12):
            raise CokerSingularError("force component left the odd mirror class")
        cols.append(np.concatenate([tgt_force.T @ fp, tgt_disloc.T @ dp]))
    P = np.stack(cols, axis=1) if cols else np.zeros((0, 0))
    if P.shape[0] != P.shape[1]:
        raise CokerSingularError(f"P is not square: {P.shape}")
    sv = np.linalg.svd(P, compute_uv=False)
    if sv.size == 0 or sv[-1] < 1e-12 * max(1.0, sv[0]):
        raise CokerSingularError(f"P is singular for N={N}")
    probe = np.linalg.solve(P, P @ np.ones(P.shape[1]))
    if np.max(np.abs(probe - 1.0)) > 1e-9:
        raise CokerSingularError("explicit solve failed to invert P")
    return CokerMap(
        N=N,
        x=x,
        S=S,
        T=T_N,
        T00=T00,
        F=F,
        domain_basis=(dom_plus, dom_minus),
        target_basis=(tgt_force, tgt_disloc),
        matrix=P,
        norm=float(sv[0]),
        inverse_norm=float(1.0 / sv[-1]),
        condition=float(sv[0] / sv[-1]),
    )
