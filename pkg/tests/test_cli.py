from __future__ import annotations

import json

import pytest

from fbms import acceptance
from fbms.cli import EXIT_ERROR, EXIT_OK, EXIT_USAGE, main


def _run(tmp_path, *args) -> int:
    return main([*args, "--out", str(tmp_path), "--no-figures"])


def test_topology_default_grid_passes(tmp_path):
    assert _run(tmp_path, "topology") == EXIT_OK
    report = json.loads((tmp_path / "topology.json").read_text())
    assert report["all_pass"] and report["first_failure"] is None
    assert len(report["rows"]) == 8 * 10


def test_topology_single_layer_rows(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"topology_N": [1, 1], "topology_m": [3, 5]}))
    assert _run(tmp_path, "topology", "--config", str(cfg)) == EXIT_OK
    rows = json.loads((tmp_path / "topology.json").read_text())["rows"]
    assert [(r["genus"], r["boundary"]) for r in rows] == [(0, 1)] * 3


def test_malformed_config_is_a_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    with pytest.raises(SystemExit) as exc:
        _run(tmp_path, "topology", "--config", str(cfg))
    assert exc.value.code == EXIT_USAGE


def test_unknown_config_key_is_a_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(SystemExit) as exc:
        _run(tmp_path, "topology", "--config", str(cfg))
    assert exc.value.code == EXIT_USAGE


def test_unknown_flag_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        _run(tmp_path, "verify", "--bogus")
    assert exc.value.code == EXIT_USAGE


def test_unknown_only_token_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        _run(tmp_path, "verify", "--only", "astrology")
    assert exc.value.code == EXIT_USAGE


def test_surface_2_10_writes_artifacts(tmp_path):
    assert _run(tmp_path, "surface", "--N", "2", "--m", "10") == EXIT_OK
    stem = "surface_N2_m10"
    for suffix in (".obj", ".json", "_patch.csv", "_audit.json"):
        assert (tmp_path / f"{stem}{suffix}").stat().st_size > 0
    audit = json.loads((tmp_path / f"{stem}_audit.json").read_text())
    assert audit["conormal_max_rad"] < 1e-3
    assert audit["orbit_gap"] < 1e-9
    assert audit["self_intersections"] == 0


def test_surface_4_8_has_24_catenoid_regions(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"audit_intersections": False}))
    assert _run(tmp_path, "surface", "--N", "4", "--m", "8", "--config", str(cfg)) == EXIT_OK
    audit = json.loads((tmp_path / "surface_N4_m8_audit.json").read_text())
    assert audit["catenoid_regions"] == 24


def test_bad_resolution_is_an_error(tmp_path, capsys):
    assert _run(tmp_path, "surface", "--N", "2", "--m", "10", "--resolution", "-1") == EXIT_ERROR
    assert "N=2, m=10" in capsys.readouterr().err


def test_only_spectra_selects_the_spectral_criteria():
    assert acceptance.select_criteria(["spectra"]) == [6, 7, 10]
    assert acceptance.select_criteria(["index,1"]) == [1, 8]


def test_verify_subset_writes_verdicts(tmp_path):
    assert _run(tmp_path, "verify", "--only", "topology", "--only", "index") == EXIT_OK
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["selected"] == [1, 8]
    assert [c["verdict"] for c in report["criteria"]] == ["PASS", "PASS"]
    assert report["worst"] == "PASS"


@pytest.mark.parametrize("command", ["balance", "index", "topology"])
def test_reports_are_deterministic(tmp_path, command):
    first, second = tmp_path / "a", tmp_path / "b"
    assert _run(first, command) == EXIT_OK
    assert _run(second, command) == EXIT_OK
    for path in sorted(first.iterdir()):
        assert path.read_bytes() == (second / path.name).read_bytes()


def test_figures_are_rendered(tmp_path):
    assert main(["balance", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "balance.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
