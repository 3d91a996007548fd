"""Shared helpers for the figure scripts: CSV loading, provenance, CLI plumbing."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # headless rendering only

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class InputError(Exception):
    pass


def read_csv(path: str | Path, expected_header: list[str]) -> list[dict]:
    """Load a report CSV, insisting on the exact expected header."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file, no header") from None
        if header != expected_header:
            raise InputError(
                f"{path}: header mismatch: expected {expected_header}, got {header}"
            )
        return [dict(zip(header, row)) for row in reader]


def provenance(csv_path: str | Path, explicit_title: str | None) -> str:
    """Figure title: scenario and seed(s), from the run's resolved_config.txt."""
    if explicit_title:
        return explicit_title
    directory = Path(csv_path).resolve().parent
    label = []
    for candidate in (directory, directory.parent):
        resolved = candidate / "resolved_config.txt"
        if resolved.exists():
            keys = {}
            for line in resolved.read_text(encoding="utf-8").splitlines():
                if "=" in line:
                    key, _, value = line.partition("=")
                    keys[key.strip()] = value.strip()
            label.append(keys.get("map") or "scenario")
            label.append(f"model {keys.get('model', '?')}")
            if directory.name.startswith("seed_"):
                label.append(directory.name.replace("_", " "))
            elif directory.name == "aggregate":
                label.append(f"seeds {keys.get('seeds', '?')}")
            else:
                label.append(f"seed {keys.get('seed', '?')}")
            break
    return " | ".join(label) if label else Path(csv_path).stem


def figure_parser(description: str, multi_in: bool = False) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument(
        "--in", dest="inputs", action="append", required=True, metavar="CSV",
        help="input report CSV" + (" (repeatable)" if multi_in else ""),
    )
    parser.add_argument("--out", required=True, metavar="IMG", help="output image path")
    parser.add_argument("--title", default=None, help="override the figure title")
    return parser


def empty_axes_figure(out: str, title: str, message: str) -> None:
    print(f"warning: {message}; writing empty figure", file=sys.stderr)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.set_title(title)
    ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
    fig.savefig(out, dpi=120)
    plt.close(fig)


def run_script(render) -> int:
    """Execute a figure renderer with uniform error handling (exit 0/1)."""
    try:
        render()
        return 0
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
