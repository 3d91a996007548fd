import math
from pathlib import Path

import numpy as np
import pytest

from natdis.cli import main
from natdis.mapgraph import load_map

REPO = Path(__file__).resolve().parents[1]
DESK = str(REPO / "scenarios" / "tacloban_desk" / "scenario.conf")

SMALL = [
    "--set", "scenario.duration_s=600",
    "--set", "scenario.nodes=10",
    "--set", "mobility.count_healthy_local=6",
    "--set", "mobility.count_injured_local=1",
    "--set", "mobility.count_drt=1",
    "--set", "mobility.count_usrt=1",
    "--set", "mobility.count_scientist=0",
    "--set", "mobility.count_un_official=1",
    "--set", "mobility.count_gov_official=0",
    "--quiet",
]


def test_validate_shipped_desk_scenario():
    assert main(["validate", "--config", DESK, "--quiet"]) == 0


def test_validate_reports_missing_map(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("[scenario]\nmap = nope.wkt\npois = nope.txt\nnodes = 500\n")
    assert main(["validate", "--config", str(bad), "--quiet"]) == 1


def test_validate_rejects_unknown_key(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("[scenario]\nwarp_speed = 9\n")
    assert main(["validate", "--config", str(bad), "--quiet"]) == 1


def test_unknown_override_exits_with_validation_error():
    assert main(["validate", "--config", DESK, "--set", "scenario.bogus=1", "--quiet"]) == 1


def test_missing_config_file_is_validation_error(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "none.conf"), "--quiet"]) == 1


def test_run_writes_reports_and_provenance(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--config", DESK, "--seed", "3", "--out", str(out)] + SMALL)
    assert code == 0
    for name in ("density.csv", "encounters.csv", "delay_cdf.csv", "buffer.csv",
                 "delivery_matrix.csv", "summary.csv", "resolved_config.txt"):
        assert (out / name).exists(), name
    resolved = (out / "resolved_config.txt").read_text()
    assert "duration_s = 600.0" in resolved  # overrides are echoed
    assert "model = nd" in resolved


def test_run_determinism_via_cli(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", DESK, "--seed", "9", "--out", str(out_a)] + SMALL) == 0
    assert main(["run", "--config", DESK, "--seed", "9", "--out", str(out_b)] + SMALL) == 0
    for name in ("density.csv", "encounters.csv", "delay_cdf.csv", "buffer.csv",
                 "delivery_matrix.csv", "summary.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_batch_layout(tmp_path):
    out = tmp_path / "batch"
    code = main(
        ["batch", "--config", DESK, "--seeds", "1,2,3", "--out", str(out)] + SMALL
    )
    assert code == 0
    for seed in (1, 2, 3):
        assert (out / f"seed_{seed}" / "summary.csv").exists()
    assert (out / "aggregate" / "summary.csv").exists()
    header = (out / "aggregate" / "summary.csv").read_text().splitlines()[0]
    assert header == "metric,value_mean,value_std"


def test_map_info_prints_stats(capsys):
    assert main(["map-info", "--config", DESK, "--quiet"]) == 0
    output = capsys.readouterr().out
    assert "vertices: 165" in output
    assert "edges: 304" in output
    assert "components: 1" in output
    assert "total_street_length_m: 30400.0" in output


def test_help_lists_every_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for token in ("run", "batch", "validate", "map-info"):
        assert token in text


def test_run_help_lists_flags(capsys):
    with pytest.raises(SystemExit):
        main(["run", "--help"])
    text = capsys.readouterr().out
    for flag in ("--config", "--out", "--seed", "--set", "--quiet"):
        assert flag in text


def _offstreet_cells(out_dir: Path, graph, threshold_m: float):
    """Nonzero density cells whose centers are farther than threshold from streets."""
    offstreet = []
    for line in (out_dir / "density.csv").read_text().splitlines()[1:]:
        xs, ys, avg = line.split(",")
        if float(avg) <= 0:
            continue
        cx, cy = (int(xs) + 0.5) * 10.0, (int(ys) + 0.5) * 10.0
        if graph.distances_to_edges(cx, cy).min() > threshold_m:
            offstreet.append((xs, ys))
    return offstreet


def test_rwp_override_puts_density_off_street(tmp_path):
    graph, _ = load_map((REPO / "scenarios/tacloban_desk/map.wkt").read_text())
    out_rwp = tmp_path / "rwp"
    out_map = tmp_path / "map"
    extra = ["--set", "scenario.duration_s=3600", "--set", "traffic.enabled=false"]
    assert main(["run", "--config", DESK, "--seed", "5", "--out", str(out_rwp),
                 "--set", "mobility.model=rwp"] + SMALL[2:] + extra) == 0
    assert main(["run", "--config", DESK, "--seed", "5", "--out", str(out_map),
                 "--set", "mobility.model=map"] + SMALL[2:] + extra) == 0
    # cell centers can sit half a diagonal from a street while the node is on it
    margin = math.hypot(5.0, 5.0) + 1e-6
    assert len(_offstreet_cells(out_rwp, graph, margin)) > 0
    assert len(_offstreet_cells(out_map, graph, margin)) == 0
