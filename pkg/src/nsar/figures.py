"""Bar-chart rendering for the benchmark grid, written alongside the CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["render_replication_figures"]

_BAR_COLORS = [
    "#4878d0",
    "#6ca9e0",
    "#ee854a",
    "#d65f5f",
    "#b47cc7",
    "#6acc64",
    "#797979",
]


def render_replication_figures(cells, out_dir) -> list[Path]:
    """One figure per target size: a grid of per-setup error bar charts.

    Bars follow the grid's algorithm order; whiskers span the 95% Wilson
    interval. Returns the written file paths.
    """
    out = Path(out_dir) / "figures"
    out.mkdir(parents=True, exist_ok=True)

    panels: dict[int, dict[int, list]] = {}
    for cfg, est in cells:
        panels.setdefault(cfg.m, {}).setdefault(cfg.setup, []).append((cfg, est))

    written = []
    for m, by_setup in sorted(panels.items()):
        setups = sorted(by_setup)
        ncols = min(3, len(setups))
        nrows = (len(setups) + ncols - 1) // ncols
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows), squeeze=False, sharey=False
        )
        for ax in axes.flat[len(setups) :]:
            ax.set_visible(False)
        for ax, setup in zip(axes.flat, setups):
            entries = by_setup[setup]
            labels = [cfg.algorithm.label() for cfg, _ in entries]
            heights = [est.p_hat for _, est in entries]
            err_low = [est.p_hat - est.ci_low for _, est in entries]
            err_high = [est.ci_high - est.p_hat for _, est in entries]
            x = range(1, len(entries) + 1)
            ax.bar(
                x,
                heights,
                yerr=[err_low, err_high],
                capsize=2,
                color=_BAR_COLORS[: len(entries)],
            )
            ax.set_xticks(list(x))
            ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
            t = int(entries[0][1].budget_mean)
            ax.set_title(f"setup {setup} (T={t})", fontsize=10)
            ax.set_ylabel("error frequency", fontsize=8)
            ax.grid(True, axis="y", alpha=0.3)
        k = cells[0][0].k
        fig.suptitle(f"misidentification frequency, M={m}, K={k}", fontsize=12)
        fig.tight_layout(rect=(0, 0, 1, 0.96))
        path = out / f"errors_m{m}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
