from __future__ import annotations

import logging
from pathlib import Path

import matplotlib
import matplotlib.pyplot as plt

from iirnn.models.report import EvalReport
from iirnn.output.report_csv import coldstart_frame

matplotlib.use("Agg")

logger = logging.getLogger(__name__)

COLORS = {
    "ii-rnn-lhs": "#d62728",
    "ii-rnn-ap": "#ff7f0e",
    "intra-rnn": "#1f77b4",
    "item-knn": "#2ca02c",
    "most-recent": "#9467bd",
    "most-popular": "#7f7f7f",
    "bpr-mf": "#8c564b",
}


def _apply_style(ax: plt.Axes) -> None:
    ax.set_facecolor("white")
    ax.grid(True, alpha=0.3, linestyle="--")
    ax.tick_params(labelsize=9)
    handles, _ = ax.get_legend_handles_labels()
    if handles:
        ax.legend(fontsize=9, loc="lower right")


def _save_figure(fig: plt.Figure, path: Path) -> None:
    fig.savefig(
        path,
        dpi=150,
        bbox_inches="tight",
        facecolor="white",
        edgecolor="none",
    )
    plt.close(fig)


def generate_coldstart_chart(
    report: EvalReport, path: Path, k: int = 5
) -> Path | None:
    """Recall@k against the first-n position, one line per model."""
    try:
        frame = coldstart_frame(report, k)
        if frame.empty:
            logger.warning("Nothing to plot for K=%d", k)
            return None

        fig, ax = plt.subplots(figsize=(8, 5))
        fig.suptitle(f"Recall@{k} over the first n predictions", fontsize=13)
        positions = sorted(frame["n"].unique())
        for model, rows in frame.groupby("model", sort=False):
            ax.plot(
                [positions.index(n) for n in rows["n"]],
                rows["recall_at_5"],
                marker="o",
                linewidth=1.2,
                color=COLORS.get(str(model)),
                label=str(model),
            )
        ax.set_xticks(range(len(positions)))
        ax.set_xticklabels([str(n) for n in positions])
        ax.set_xlabel("n", fontsize=10)
        ax.set_ylabel(f"Recall@{k}", fontsize=10)
        _apply_style(ax)

        path.parent.mkdir(parents=True, exist_ok=True)
        _save_figure(fig, path)
        return path
    except Exception:
        logger.warning("Failed to generate cold-start chart", exc_info=True)
        return None
