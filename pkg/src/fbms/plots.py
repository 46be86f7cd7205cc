"""Figures written next to the CLI's data files.

Every function takes already-computed report data and a target path; nothing
here recomputes geometry.  The Agg backend keeps rendering headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "STYLE",
    "plot_topology",
    "plot_waist_ratios",
    "plot_surface_profile",
    "plot_mean_curvature",
    "plot_dirichlet_lambda",
    "plot_index_bounds",
    "plot_verdicts",
]

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.linestyle": "--",
    "grid.alpha": 0.5,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 7,
    "lines.linewidth": 1.2,
    "lines.markersize": 3,
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_topology(rows: list[dict], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for N in sorted({r["N"] for r in rows}):
            sel = [r for r in rows if r["N"] == N]
            ax.plot([r["m"] for r in sel], [r["genus"] for r in sel], "o-", label=f"N={N}")
        ax.set_xlabel("ribbons per gap m")
        ax.set_ylabel("genus")
        ax.set_title("genus of the stacking")
        ax.legend(ncol=2)
        return _save(fig, path)


def plot_waist_ratios(ratios: dict[int, list[float]], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for N, x in sorted(ratios.items()):
            j = np.arange(1, len(x) + 1)
            ax.plot(j / N, x, "o-", label=f"N={N}")
        ax.set_xlabel("catenoid position j/N")
        ax.set_ylabel("waist ratio")
        ax.set_title("limiting waist ratios")
        ax.legend(ncol=2)
        return _save(fig, path)


def plot_surface_profile(vertices: np.ndarray, layer: np.ndarray, path, max_points: int = 20000) -> Path:
    """Height against distance from the vertical axis, one colour per layer."""
    step = max(1, len(vertices) // max_points)
    P = vertices[::step]
    lay = layer[::step]
    radial = np.hypot(P[:, 0], P[:, 1])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for i in np.unique(lay):
            sel = lay == i
            ax.scatter(radial[sel], P[sel, 2], s=1, label=f"layer {int(i)}")
        ax.set_xlabel("distance from axis")
        ax.set_ylabel("height")
        ax.set_title("vertex profile")
        ax.legend(markerscale=4)
        return _save(fig, path)


def plot_mean_curvature(axis_distance: np.ndarray, H: np.ndarray, path) -> Path:
    sel = np.isfinite(axis_distance) & (np.abs(H) > 0)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(axis_distance[sel], np.abs(H[sel]), ".", ms=1)
        ax.set_xlabel("distance to nearest catenoid axis")
        ax.set_ylabel("|H|")
        ax.set_title("mean curvature of the initial surface")
        return _save(fig, path)


def plot_dirichlet_lambda(T: list[float], lam: list[float], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(T, np.abs(np.asarray(lam) + 1.0), "o-")
        ax.set_xlabel("half-length T")
        ax.set_ylabel("lowest Dirichlet eigenvalue + 1")
        ax.set_title("catenoid model problem")
        return _save(fig, path)


def plot_index_bounds(rows: list[dict], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for N in sorted({r["N"] for r in rows}):
            sel = [r for r in rows if r["N"] == N]
            m = [r["m"] for r in sel]
            line = ax.plot(m, [r["upper"] for r in sel], "-", label=f"N={N}")[0]
            ax.plot(m, [r["lower"] for r in sel], "--", color=line.get_color())
        ax.set_xlabel("ribbons per gap m")
        ax.set_ylabel("index bounds (dashed: lower)")
        ax.set_title("Morse index budget")
        ax.legend(ncol=2)
        return _save(fig, path)


def plot_verdicts(results: list[dict], path) -> Path:
    colours = {"PASS": "tab:green", "FAIL": "tab:red", "ERROR": "tab:gray"}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 0.3 * len(results) + 0.8))
        for k, r in enumerate(results):
            ax.barh(k, 1, color=colours[r["verdict"]])
            ax.text(0.02, k, f"{r['number']}. {r['name']}: {r['verdict']}", va="center", fontsize=8)
        ax.set_yticks([])
        ax.set_xticks([])
        ax.invert_yaxis()
        ax.set_title("acceptance verdicts")
        ax.grid(False)
        return _save(fig, path)
