"""Command-line driver: ``fbms topology|balance|surface|geometry|spectra|index|verify``.

Configuration is one JSON document; command-line flags override its keys.
Reports are JSON with sorted keys, tables are CSV, meshes are OBJ, and each
command also renders a PNG figure next to its data unless ``--no-figures``.
Exit codes: 0 all checks pass, 1 a check failed, 2 usage error, 3 a check
raised an error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance
from .balance import StackingParams, derived_parameters, limiting_waist_ratios, predicted_forces
from .geometry import (
    catenoid_sup_norm,
    disc_residual,
    export_field_csv,
    mean_curvature_field,
    oracle_agreement,
    vertical_forces,
)
from .index import theorem_bounds, topological_translation
from .spectra import (
    catenoid_closed_form,
    catenoid_problem,
    fd_eigensolve,
    model_low_spectrum_counts,
    trace_probe,
)
from .surface import (
    assemble_surface,
    conormal_audit,
    export_obj,
    export_patch_csv,
    export_report,
    orbit_audit,
    self_intersections,
)
from .topology import build_combinatorial_stacking, combinatorial_topology, euler_characteristic, stacking_topology

__all__ = ["RunConfig", "ConfigError", "load_config", "build_parser", "main"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3
COMMANDS = ("topology", "balance", "surface", "geometry", "spectra", "index", "verify")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "verify"
    N: int = 2
    m: int = 10
    zeta: list[float] | None = None
    xi: list[float] | None = None
    resolution: float | None = None
    grid_h: float = 1.0 / 16
    seed: int = 0
    out: str = "fbms_out"
    figures: bool = True
    only: list[str] = field(default_factory=list)
    topology_N: list[int] = field(default_factory=lambda: [1, 8])
    topology_m: list[int] = field(default_factory=lambda: [3, 12])
    index_N: list[int] = field(default_factory=lambda: [2, 8])
    index_m: list[int] = field(default_factory=lambda: [3, 50])
    T_values: list[float] = field(default_factory=lambda: [3.0, 6.0, 12.0])
    radii: list[float] = field(default_factory=lambda: [0.3, 0.1, 0.03])
    n_samples: int = 1000
    oracle_points: int = 500
    audit_intersections: bool = True

    def params(self) -> StackingParams:
        return StackingParams(self.N, self.m, self.zeta, self.xi)

    def out_dir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(_FIELD_TYPES) - {"command"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def _validate(cfg: RunConfig) -> None:
    ints = ("N", "m", "seed", "n_samples", "oracle_points")
    for name in ints:
        if not isinstance(getattr(cfg, name), int) or isinstance(getattr(cfg, name), bool):
            raise ConfigError(f"{name} must be an integer")
    for name in ("topology_N", "topology_m", "index_N", "index_m"):
        rng = getattr(cfg, name)
        if not (isinstance(rng, list) and len(rng) == 2 and all(isinstance(v, int) for v in rng) and rng[0] <= rng[1]):
            raise ConfigError(f"{name} must be [low, high] integers")
    if not isinstance(cfg.grid_h, (int, float)) or not cfg.grid_h > 0:
        raise ConfigError("grid_h must be positive")
    if cfg.resolution is not None and not isinstance(cfg.resolution, (int, float)):
        raise ConfigError("resolution must be a number")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbms", description="Stacked free boundary minimal surfaces: constructions and checks.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--N", type=int, help="number of layers")
    parser.add_argument("--m", type=int, help="ribbons per gap")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="seed for random probes")
    parser.add_argument("--grid-h", dest="grid_h", type=float, help="finite-difference grid spacing")
    parser.add_argument("--resolution", type=float, help="mesh spacing in the fundamental wedge")
    parser.add_argument("--only", action="append", help="verify: restrict to modules or criterion numbers (repeatable, comma separated)")
    parser.add_argument("--no-figures", dest="figures", action="store_false", default=None, help="skip PNG figures")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = load_config(args.config)
    data.pop("command", None)
    for name in ("N", "m", "out", "seed", "grid_h", "resolution", "only", "figures"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    cfg = RunConfig(command=args.command, **data)
    _validate(cfg)
    return cfg


# ---------------------------------------------------------------- output helpers


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(payload: dict, path: Path) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def write_csv(rows: list[dict], path: Path) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def _plots():
    from . import plots

    return plots


def _inclusive(rng: list[int]) -> range:
    return range(rng[0], rng[1] + 1)


# ---------------------------------------------------------------- commands


def cmd_topology(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    rows = []
    first_failure = None
    for N in _inclusive(cfg.topology_N):
        for m in _inclusive(cfg.topology_m):
            topo = stacking_topology(N, m)
            comb = build_combinatorial_stacking(N, m)
            chi = euler_characteristic(comb)
            ok = (
                chi == topo.euler_char == m - (m - 1) * N
                and combinatorial_topology(comb) == topo
                and 8 * topo.genus + 4 * topo.boundary_components - 8 == 4 * (m - 1) * N - 4 * m
            )
            rows.append({"N": N, "m": m, "genus": topo.genus, "boundary": topo.boundary_components, "euler_char": chi, "ok": ok})
            if not ok and first_failure is None:
                first_failure = {"N": N, "m": m}
    write_json({"all_pass": first_failure is None, "first_failure": first_failure, "rows": rows}, out / "topology.json")
    write_csv(rows, out / "topology.csv")
    if cfg.figures:
        _plots().plot_topology(rows, out / "topology.png")
    if first_failure is not None:
        print(f"topology identity fails at N={first_failure['N']}, m={first_failure['m']}", file=sys.stderr)
        return EXIT_FAIL
    print(f"topology: {len(rows)} cases pass")
    return EXIT_OK


def cmd_balance(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    d = derived_parameters(cfg.params())
    F, Ftilde = predicted_forces(d)
    report = {
        "N": d.N,
        "m": d.m,
        "lambda": d.lam,
        "waist_ratios": d.x,
        "tau": d.tau,
        "a": d.a,
        "catenoid_heights": d.hK,
        "disc_heights": d.hB,
        "catenoid_height_gaps": d.delta_hK,
        "dislocations": d.disloc,
        "matching_residual": d.matching_residual,
        "predicted_forces": F,
        "normalized_force_differences": Ftilde,
    }
    write_json(report, out / "balance.json")
    rows = [
        {"catenoid": i + 1, "waist_ratio": repr(float(d.x[i])), "tau": repr(float(d.tau[i])), "a": repr(float(d.a[i])), "height": repr(float(d.hK[i]))}
        for i in range(d.N - 1)
    ]
    write_csv(rows, out / "balance.csv")
    if cfg.figures:
        ratios = {N: limiting_waist_ratios(N)[0].tolist() for N in range(2, 9)}
        _plots().plot_waist_ratios(ratios, out / "balance.png")
    print(f"balance: N={d.N} m={d.m} lambda={d.lam:.12g} matching residual={d.matching_residual:.3g}")
    return EXIT_OK


def cmd_surface(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    try:
        mesh = assemble_surface(cfg.params(), resolution=cfg.resolution)
    except ValueError as exc:
        raise RuntimeError(f"surface assembly for N={cfg.N}, m={cfg.m}: {exc}") from exc
    stem = f"surface_N{cfg.N}_m{cfg.m}"
    export_obj(mesh, out / f"{stem}.obj")
    export_report(mesh, out / f"{stem}.json")
    export_patch_csv(mesh, out / f"{stem}_patch.csv")
    conormal = float(np.max(conormal_audit(mesh)))
    orbit = orbit_audit(mesh)
    hits = self_intersections(mesh) if cfg.audit_intersections else None
    # K_i(m^-4) is empty while tau_i > m^-4, so regions are counted on the full K_i
    cat = mesh.labels["in_K"].astype(bool)
    azimuth = np.arctan2(mesh.vertices[cat, 1], mesh.vertices[cat, 0])
    slot = np.rint((azimuth - np.pi / (2 * cfg.m)) / (np.pi / cfg.m)).astype(int) % (2 * cfg.m)
    catenoid_regions = len(set(zip(mesh.labels["catenoid"][cat].tolist(), slot.tolist())))
    audit = {
        "N": cfg.N,
        "m": cfg.m,
        "conormal_max_rad": conormal,
        "orbit_gap": orbit,
        "self_intersections": hits,
        "catenoid_regions": catenoid_regions,
        "waists_welded": mesh.waists_welded,
        "waists_expected": mesh.waists_expected,
    }
    write_json(audit, out / f"{stem}_audit.json")
    if cfg.figures:
        _plots().plot_surface_profile(mesh.vertices, mesh.labels["layer"], out / f"{stem}.png")
    print(f"surface: {mesh.n_vertices} vertices, conormal max {conormal:.3g} rad, orbit gap {orbit:.3g}, self-intersections {hits}")
    ok = conormal < 1e-3 and orbit < 1e-9 and hits in (0, None)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_geometry(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    mesh = assemble_surface(cfg.params(), resolution=cfg.resolution)
    field_ = mean_curvature_field(mesh)
    H = field_["H"]
    d = mesh.derived
    F = vertical_forces(mesh)
    predicted, _ = predicted_forces(d)
    stem = f"geometry_N{cfg.N}_m{cfg.m}"
    report = {
        "N": cfg.N,
        "m": cfg.m,
        "sup_catenoid_rho2_H": field_["sup_catenoid_rho2"],
        "sup_catenoid_rho1_H": field_["sup_catenoid_rho1"],
        "catenoid_sup_norm": catenoid_sup_norm(d),
        "oracle_agreement": oracle_agreement(d, n_points=cfg.oracle_points, seed=cfg.seed),
        "disc_residual": disc_residual(mesh, H),
        "mesh_forces": F,
        "predicted_forces": predicted,
        "seed": cfg.seed,
    }
    write_json(report, out / f"{stem}.json")
    export_field_csv(mesh, H, None, out / f"{stem}_field.csv")
    if cfg.figures:
        _plots().plot_mean_curvature(mesh.labels["axis_distance"], H, out / f"{stem}.png")
    print(f"geometry: catenoid sup rho^-1|H| = {report['catenoid_sup_norm']:.3g}, forces {np.array2string(F, precision=4)}")
    return EXIT_OK


def cmd_spectra(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    lam = [float(catenoid_closed_form(T, "dirichlet-t-even").eigenvalues[0]) for T in cfg.T_values]
    fd = fd_eigensolve(catenoid_problem(cfg.T_values[0], cfg.grid_h, dirichlet=True), k=2)
    counts = []
    for T in cfg.T_values:
        counts.append(model_low_spectrum_counts("catenoid_neumann", T, h=cfg.grid_h))
    for model in ("perforated_one", "perforated_two"):
        for r in cfg.radii:
            counts.append(model_low_spectrum_counts(model, r, h=cfg.grid_h, k=4))
    counts.append(model_low_spectrum_counts("rectangle", 0.0, h=cfg.grid_h, k=4))
    probes = {kind: trace_probe(kind, n_samples=cfg.n_samples, seed=cfg.seed)["max_ratio"] for kind in ("catenoid_rect", "perforated_one", "perforated_two")}
    report = {
        "T": cfg.T_values,
        "dirichlet_lambda1_closed_form": lam,
        "dirichlet_lambda1_fd": float(fd.eigenvalues[0]),
        "grid_h": cfg.grid_h,
        "counts": counts,
        "trace_probe_max_ratio": probes,
        "seed": cfg.seed,
        "n_samples": cfg.n_samples,
    }
    write_json(report, out / "spectra.json")
    rows = [
        {
            "model": c["model"],
            "parameter": c["parameter"],
            "index": c["negative"],
            "nullity": c["zero"],
            "stable": c["stable"],
            "eigenvalues": " ".join(repr(v) for v in c["eigenvalues"]),
        }
        for c in counts
    ]
    write_csv(rows, out / "spectra.csv")
    if cfg.figures:
        _plots().plot_dirichlet_lambda(cfg.T_values, lam, out / "spectra.png")
    print(f"spectra: {len(counts)} model problems, trace ratio max {max(probes.values()):.3f}")
    return EXIT_OK


def cmd_index(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    rows = []
    all_ok = True
    for N in _inclusive(cfg.index_N):
        for m in _inclusive(cfg.index_m):
            b = theorem_bounds(N, m)
            t = topological_translation(N, m)
            ok = bool(t["lower_identity"] and t["upper_identity"])
            all_ok &= ok
            rows.append({
                "N": N,
                "m": m,
                "lower": b.lower,
                "upper": b.upper_ind_plus_nul,
                "equivariant_lower": b.equiv_lower,
                "equivariant_upper": b.equiv_upper,
                "genus": t["genus"],
                "boundary": t["boundary"],
                "identities": ok,
            })
    write_json({"all_identities_hold": all_ok, "rows": rows}, out / "index.json")
    write_csv(rows, out / "index.csv")
    if cfg.figures:
        _plots().plot_index_bounds(rows, out / "index.png")
    print(f"index: {len(rows)} budgets, identities {'hold' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_verify(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    numbers = acceptance.select_criteria(cfg.only)
    results = acceptance.run_criteria(numbers, seed=cfg.seed, on_result=lambda r: print(r.line(), flush=True))
    entries = [r.as_dict() for r in results]
    verdicts = [r.verdict for r in results]
    worst = "ERROR" if "ERROR" in verdicts else "FAIL" if "FAIL" in verdicts else "PASS"
    write_json({"criteria": entries, "selected": numbers, "seed": cfg.seed, "worst": worst}, out / "verify.json")
    if cfg.figures:
        _plots().plot_verdicts(entries, out / "verify.png")
    return {"PASS": EXIT_OK, "FAIL": EXIT_FAIL, "ERROR": EXIT_ERROR}[worst]


HANDLERS = {
    "topology": cmd_topology,
    "balance": cmd_balance,
    "surface": cmd_surface,
    "geometry": cmd_geometry,
    "spectra": cmd_spectra,
    "index": cmd_index,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if cfg.command == "verify":
            acceptance.select_criteria(cfg.only)
    except (ConfigError, TypeError, ValueError) as exc:
        parser.error(str(exc))
    try:
        return HANDLERS[cfg.command](cfg)
    except Exception as exc:
        print(f"fbms {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
