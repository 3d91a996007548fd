#!/usr/bin/env python3
"""Render every figure for one report directory.

Usage: make_all.py --reports DIR [--out-dir DIR] [--title TEXT]
"""
import argparse
import subprocess
import sys
from pathlib import Path

FIGURES = {
    "density.py": "density.csv",
    "encounters.py": "encounters.csv",
    "cdf.py": "delay_cdf.csv",
    "buffer.py": "buffer.csv",
    "matrix.py": "delivery_matrix.csv",
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reports", required=True, metavar="DIR", help="run output directory")
    parser.add_argument("--out-dir", default=None, metavar="DIR", help="image directory")
    parser.add_argument("--title", default=None)
    args = parser.parse_args()
    reports = Path(args.reports)
    out_dir = Path(args.out_dir) if args.out_dir else reports / "figures"
    out_dir.mkdir(parents=True, exist_ok=True)
    here = Path(__file__).parent
    failures = 0
    for script, csv_name in FIGURES.items():
        csv_path = reports / csv_name
        if not csv_path.exists():
            print(f"skipping {script}: {csv_path} not found", file=sys.stderr)
            continue
        out = out_dir / (csv_path.stem + ".png")
        cmd = [sys.executable, str(here / script), "--in", str(csv_path), "--out", str(out)]
        if args.title:
            cmd += ["--title", args.title]
        result = subprocess.run(cmd)
        if result.returncode != 0:
            failures += 1
    if failures:
        print(f"{failures} figure(s) failed", file=sys.stderr)
        return 1
    print(f"figures written to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
