"""Rendering of style reports to figure files.

Kept separate from the evaluation math: reports are data, figures are a view.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PANELS = (("raw", "Raw footage"), ("reference", "Reference style"), ("edited", "Auto-edited"))


def render_style_report(report: dict, path) -> None:
    """Bar chart of the three transition-step histograms, one panel per corpus."""
    n_bins = len(report["scale"])
    steps = list(range(n_bins))
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.2), sharey=True)
    for ax, (key, title) in zip(axes, _PANELS):
        ax.bar(steps, report["histograms"][key], color="#4878b0", edgecolor="black", linewidth=0.5)
        ax.set_title(title, fontsize=10)
        ax.set_xlabel("size-step magnitude")
        ax.set_xticks(steps)
        ax.set_ylim(0, 1.0)
    axes[0].set_ylabel("share of transitions")
    ratio = report["improvement_ratio"]
    fig.suptitle(
        "Shot-size transition histograms (improvement ratio: "
        + ("inf" if ratio is None else f"{ratio:.2f}")
        + ")",
        fontsize=11,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "autocut"})
    plt.close(fig)
