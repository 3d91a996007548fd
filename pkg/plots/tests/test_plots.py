"""S1: the five figure scripts run headlessly on desk-fixture CSVs."""
import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]
PLOTS = REPO / "plots"
DESK = REPO / "scenarios" / "tacloban_desk" / "scenario.conf"

FIXTURE_OVERRIDES = [
    "--set", "scenario.duration_s=7200",
    "--set", "scenario.nodes=20",
    "--set", "mobility.count_healthy_local=10",
    "--set", "mobility.count_injured_local=3",
    "--set", "mobility.count_drt=3",
    "--set", "mobility.count_usrt=2",
    "--set", "mobility.count_scientist=0",
    "--set", "mobility.count_un_official=1",
    "--set", "mobility.count_gov_official=1",
    "--quiet",
]


@pytest.fixture(scope="module")
def report_dir(tmp_path_factory):
    """Desk-fixture CSVs produced by a short real run of the simulator CLI."""
    out = tmp_path_factory.mktemp("desk_reports")
    result = subprocess.run(
        [sys.executable, "-m", "natdis.cli", "run", "--config", str(DESK),
         "--seed", "4", "--out", str(out)] + FIXTURE_OVERRIDES,
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    return out


def run_script(name, *argv):
    return subprocess.run(
        [sys.executable, str(PLOTS / name), *argv],
        capture_output=True, text=True, cwd=str(PLOTS),
    )


CASES = [
    ("density.py", "density.csv"),
    ("encounters.py", "encounters.csv"),
    ("cdf.py", "delay_cdf.csv"),
    ("buffer.py", "buffer.csv"),
    ("matrix.py", "delivery_matrix.csv"),
]


@pytest.mark.parametrize("script,csv_name", CASES)
def test_s1_each_script_renders(report_dir, tmp_path, script, csv_name):
    out = tmp_path / (script.replace(".py", "") + ".png")
    result = run_script(script, "--in", str(report_dir / csv_name), "--out", str(out))
    assert result.returncode == 0, result.stderr
    assert out.exists() and out.stat().st_size > 0


def test_s1_density_peak_matches_report(report_dir, tmp_path):
    out = tmp_path / "density.png"
    result = run_script("density.py", "--in", str(report_dir / "density.csv"),
                        "--out", str(out))
    assert result.returncode == 0, result.stderr
    printed = [l for l in result.stdout.splitlines() if l.startswith("max_cell=")]
    assert printed, result.stdout
    figure_cell = tuple(int(v) for v in printed[0].split("=")[1].split(","))
    best, best_cell = -1.0, None
    for line in (report_dir / "density.csv").read_text().splitlines()[1:]:
        xs, ys, avg = line.split(",")
        if float(avg) > best:
            best, best_cell = float(avg), (int(xs), int(ys))
    assert figure_cell == best_cell


def test_header_mismatch_exits_nonzero(report_dir, tmp_path):
    result = run_script("density.py", "--in", str(report_dir / "buffer.csv"),
                        "--out", str(tmp_path / "x.png"))
    assert result.returncode == 1
    assert "header mismatch" in result.stderr


def test_missing_input_exits_nonzero(tmp_path):
    result = run_script("cdf.py", "--in", str(tmp_path / "none.csv"),
                        "--out", str(tmp_path / "x.png"))
    assert result.returncode == 1


def test_empty_report_gives_warning_and_empty_figure(tmp_path):
    empty = tmp_path / "delay_cdf.csv"
    empty.write_text("delay_s,fraction\n")
    out = tmp_path / "cdf.png"
    result = run_script("cdf.py", "--in", str(empty), "--out", str(out))
    assert result.returncode == 0
    assert "warning" in result.stderr
    assert out.exists()


def test_make_all_driver(report_dir, tmp_path):
    result = subprocess.run(
        [sys.executable, str(PLOTS / "make_all.py"), "--reports", str(report_dir),
         "--out-dir", str(tmp_path / "figs")],
        capture_output=True, text=True, cwd=str(PLOTS),
    )
    assert result.returncode == 0, result.stderr
    for name in ("density.png", "encounters.png", "delay_cdf.png", "buffer.png",
                 "delivery_matrix.png"):
        assert (tmp_path / "figs" / name).exists()


def test_aggregate_schema_also_renders(report_dir, tmp_path):
    # batch aggregates carry *_mean/*_std columns; the scripts accept both
    agg = tmp_path / "buffer.csv"
    rows = (report_dir / "buffer.csv").read_text().splitlines()
    agg_rows = ["time_s,mean_fraction_mean,mean_fraction_std"]
    for line in rows[1:]:
        t, v = line.split(",")
        agg_rows.append(f"{t},{v},0.0")
    agg.write_text("\n".join(agg_rows) + "\n")
    out = tmp_path / "buffer.png"
    result = run_script("buffer.py", "--in", str(agg), "--out", str(out))
    assert result.returncode == 0, result.stderr
    assert out.exists()
