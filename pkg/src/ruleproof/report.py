"""Bar-chart rendering of score reports."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import ScoreReport  # noqa: E402


def plot_report(report: ScoreReport, path: str | Path) -> Path:
    """Grouped bars of every metric per depth row; written as PNG (or by suffix)."""
    path = Path(path)
    labels = [r.depth for r in report.rows]
    metrics = report.metrics
    width = 0.8 / max(len(metrics), 1)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(labels) + 2), 3.5))
    for i, m in enumerate(metrics):
        xs = [k + (i - (len(metrics) - 1) / 2) * width for k in range(len(labels))]
        ax.bar(xs, [100 * r.values[m] for r in report.rows], width, label=m)
    ax.set_xticks(range(len(labels)), labels)
    ax.set_xlabel("depth")
    ax.set_ylabel("%")
    ax.set_ylim(0, 105)
    ax.set_title(f"{report.task} by depth")
    ax.legend(fontsize="small", loc="upper left", bbox_to_anchor=(1.0, 1.0))
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path
