#!/usr/bin/env python3
"""Spatial node density as a scatter heatmap.

Marker size and color scale with log(1 + count) to make hot spots stand out.
Prints the maximum-intensity cell as `max_cell=X,Y` for downstream checks.
"""
import math
import sys

from common import empty_axes_figure, figure_parser, plt, provenance, read_csv, run_script


def render():
    args = figure_parser(__doc__).parse_args()
    path = args.inputs[0]
    rows = read_csv(path, ["x_cell", "y_cell", "avg_count"])
    title = f"node density | {provenance(path, args.title)}"
    cells = [
        (int(r["x_cell"]), int(r["y_cell"]), float(r["avg_count"]))
        for r in rows
        if float(r["avg_count"]) > 0.0
    ]
    if not cells:
        empty_axes_figure(args.out, title, "density report has no nonzero cells")
        return
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    intensity = [math.log1p(c[2]) for c in cells]
    peak = max(cells, key=lambda c: math.log1p(c[2]))
    fig, ax = plt.subplots(figsize=(7, 7 * (max(ys) + 1) / max(max(xs) + 1, 1)))
    top = max(intensity)
    sizes = [4 + 120 * v / top for v in intensity]
    scatter = ax.scatter(xs, ys, s=sizes, c=intensity, cmap="inferno", alpha=0.85,
                         linewidths=0)
    fig.colorbar(scatter, ax=ax, label="log(1 + mean node count)")
    ax.set_xlabel("x cell")
    ax.set_ylabel("y cell")
    ax.set_title(title, fontsize=9)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    plt.close(fig)
    print(f"max_cell={peak[0]},{peak[1]}")


if __name__ == "__main__":
    sys.exit(run_script(render))
