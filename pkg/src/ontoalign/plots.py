"""Figure rendering for evaluation reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_pr_curve(points: list[tuple[float, float, float, float]], path: str, title: str) -> None:
    """Render threshold-swept precision/recall/F curves to an image file."""
    if not points:
        raise ValueError("no curve points to plot")
    thresholds = [p[0] for p in points]
    precision = [p[1] for p in points]
    recall = [p[2] for p in points]
    f_score = [p[3] for p in points]

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.plot(thresholds, precision, marker="o", markersize=3, label="precision")
    ax.plot(thresholds, recall, marker="s", markersize=3, label="recall")
    ax.plot(thresholds, f_score, marker="^", markersize=3, label="F")
    ax.set_xlabel("score threshold")
    ax.set_ylabel("metric value")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
