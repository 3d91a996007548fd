#!/usr/bin/env python3
"""Message delivery delay as a cumulative distribution (fraction of created)."""
import sys

from common import empty_axes_figure, figure_parser, plt, provenance, read_csv, run_script


def render():
    args = figure_parser(__doc__, multi_in=True).parse_args()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    title = f"delivery delay CDF | {provenance(args.inputs[0], args.title)}"
    drew = False
    for path in args.inputs:
        try:
            rows = read_csv(path, ["delay_s", "fraction"])
            fraction_col = "fraction"
        except Exception:
            rows = read_csv(path, ["delay_s", "fraction_mean", "fraction_std"])
            fraction_col = "fraction_mean"
        if not rows:
            continue
        hours = [float(r["delay_s"]) / 3600.0 for r in rows]
        fractions = [float(r[fraction_col]) for r in rows]
        ax.step(hours, fractions, where="post", label=provenance(path, None))
        drew = True
    if not drew:
        empty_axes_figure(args.out, title, "no CDF rows (no messages created)")
        return
    ax.set_xlabel("delivery delay (h)")
    ax.set_ylabel("fraction of created messages")
    ax.set_ylim(0, 1.0)
    ax.grid(alpha=0.3)
    if len(args.inputs) > 1:
        ax.legend(fontsize=7)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_script(render))
