#!/usr/bin/env python3
"""Encounters per node, grouped by role: mean totals and mean distinct peers."""
import sys

from common import empty_axes_figure, figure_parser, plt, provenance, read_csv, run_script

ROLES = ["HealthyLocal", "InjuredLocal", "DRT", "USRT", "Scientist", "UnOfficial", "GovOfficial"]


def render():
    args = figure_parser(__doc__).parse_args()
    path = args.inputs[0]
    try:
        rows = read_csv(path, ["node", "role", "total", "unique"])
        total_col, unique_col = "total", "unique"
    except Exception:
        # aggregate batches carry mean/std columns instead
        rows = read_csv(path, ["node", "role", "total_mean", "total_std",
                               "unique_mean", "unique_std"])
        total_col, unique_col = "total_mean", "unique_mean"
    title = f"encounters per node | {provenance(path, args.title)}"
    if not rows:
        empty_axes_figure(args.out, title, "encounters report is empty")
        return
    by_role = {}
    for r in rows:
        by_role.setdefault(r["role"], []).append(
            (float(r[total_col]), float(r[unique_col]))
        )
    roles = [role for role in ROLES if role in by_role] or sorted(by_role)
    totals = [sum(v[0] for v in by_role[r]) / len(by_role[r]) for r in roles]
    uniques = [sum(v[1] for v in by_role[r]) / len(by_role[r]) for r in roles]
    x = range(len(roles))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.4
    ax.bar([i - width / 2 for i in x], totals, width, label="encounters", color="#1f78b4")
    ax.bar([i + width / 2 for i in x], uniques, width, label="distinct peers", color="#b2df8a")
    ax.set_xticks(list(x))
    ax.set_xticklabels(roles, rotation=20, ha="right")
    ax.set_ylabel("mean per node (1 week)")
    ax.set_title(title, fontsize=9)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_script(render))
