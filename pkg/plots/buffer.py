#!/usr/bin/env python3
"""Mean buffer occupancy over simulated time."""
import sys

from common import empty_axes_figure, figure_parser, plt, provenance, read_csv, run_script


def render():
    args = figure_parser(__doc__).parse_args()
    path = args.inputs[0]
    try:
        rows = read_csv(path, ["time_s", "mean_fraction"])
        col = "mean_fraction"
    except Exception:
        rows = read_csv(path, ["time_s", "mean_fraction_mean", "mean_fraction_std"])
        col = "mean_fraction_mean"
    title = f"buffer occupancy | {provenance(path, args.title)}"
    if not rows:
        empty_axes_figure(args.out, title, "buffer report is empty")
        return
    days = [float(r["time_s"]) / 86400.0 for r in rows]
    fractions = [float(r[col]) for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(days, fractions, color="#1f78b4", linewidth=1.0)
    ax.set_xlabel("time (days)")
    ax.set_ylabel("mean buffer fill fraction")
    ax.set_ylim(0, 1.0)
    ax.grid(alpha=0.3)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_script(render))
