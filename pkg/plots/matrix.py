#!/usr/bin/env python3
"""Delivery rates between role pairs as an annotated heat table (rates to 2 dp)."""
import sys

from common import empty_axes_figure, figure_parser, plt, provenance, read_csv, run_script

ROLES = ["HealthyLocal", "InjuredLocal", "DRT", "USRT", "Scientist", "UnOfficial", "GovOfficial"]


def render():
    args = figure_parser(__doc__).parse_args()
    path = args.inputs[0]
    try:
        rows = read_csv(path, ["src_role", "dst_role", "created", "delivered", "rate"])
        rate_col = "rate"
    except Exception:
        rows = read_csv(path, ["src_role", "dst_role", "created_mean", "created_std",
                               "delivered_mean", "delivered_std", "rate_mean", "rate_std"])
        rate_col = "rate_mean"
    title = f"delivery rate by role pair | {provenance(path, args.title)}"
    if not rows:
        empty_axes_figure(args.out, title, "delivery matrix is empty")
        return
    index = {role: k for k, role in enumerate(ROLES)}
    grid = [[0.0] * len(ROLES) for _ in ROLES]
    for r in rows:
        grid[index[r["src_role"]]][index[r["dst_role"]]] = float(r[rate_col])
    fig, ax = plt.subplots(figsize=(7.5, 6.5))
    image = ax.imshow(grid, cmap="viridis", vmin=0.0, vmax=1.0)
    for i in range(len(ROLES)):
        for j in range(len(ROLES)):
            value = grid[i][j]
            ax.text(j, i, f"{value:.2f}", ha="center", va="center", fontsize=8,
                    color="white" if value < 0.6 else "black")
    ax.set_xticks(range(len(ROLES)))
    ax.set_xticklabels(ROLES, rotation=30, ha="right", fontsize=8)
    ax.set_yticks(range(len(ROLES)))
    ax.set_yticklabels(ROLES, fontsize=8)
    ax.set_xlabel("destination role")
    ax.set_ylabel("source role")
    fig.colorbar(image, ax=ax, label="delivery rate")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(run_script(render))
