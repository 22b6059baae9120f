"""Per-group cost histograms, normal vs. group-fair counterfactuals."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .fairness import CostPool  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.labelsize": 10,
    "legend.fontsize": 9,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}
GROUP_COLORS = ("#1f77b4", "#d62728")


def plot_cost_histograms(normal: Sequence[CostPool], fair: Sequence[CostPool], path, title: str = "",
                         bins: int = 30) -> Path:
    """Save a two-panel histogram figure and return its path."""
    costs = np.concatenate([np.asarray(p.require().costs) for p in (*normal, *fair)])
    edges = np.linspace(0.0, max(float(costs.max()), 1e-6), bins + 1)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), sharey=True)
        for ax, pools, label in zip(axes, (normal, fair), ("Normal", "Group fair")):
            for pool in pools:
                ax.hist(pool.costs, bins=edges, alpha=0.55, color=GROUP_COLORS[pool.group],
                        label=f"Group-{pool.group} (median {pool.median():.2f})")
            ax.set_title(label)
            ax.set_xlabel("cost of counterfactual (1-norm)")
            ax.legend(frameon=False)
        axes[0].set_ylabel("count")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return path
