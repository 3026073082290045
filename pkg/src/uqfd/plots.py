"""Matplotlib rendering of evaluation artifacts to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_CURVE_STYLES = {
    "uncertainty": dict(color="tab:blue", lw=2.0),
    "optimal": dict(color="tab:green", lw=1.5, ls="--"),
    "random": dict(color="tab:gray", lw=1.5, ls=":"),
}


def render_cutoff_curves(curves: dict, title: str, path) -> Path:
    """Plot the uncertainty / optimal / random cut-off curves in one figure."""
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    for name, curve in curves.items():
        q = [p[0] for p in curve.points]
        v = [p[1] for p in curve.points]
        style = _CURVE_STYLES.get(name, {})
        ax.plot(q, v, label=f"{name} (AUCOC={curve.aucoc:.3f})", **style)
    ax.set_xlabel("filtered fraction")
    ax.set_ylabel("remaining mean")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_histograms(hists: dict, title: str, path) -> Path:
    """Overlaid score histograms for correct vs misclassified samples."""
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    colors = {"correct": "tab:green", "misclassified": "tab:red"}
    for name, hist in hists.items():
        widths = hist.edges[1:] - hist.edges[:-1]
        ax.bar(
            hist.edges[:-1],
            hist.counts,
            width=widths,
            align="edge",
            alpha=0.5,
            label=name,
            color=colors.get(name),
        )
    ax.set_xlabel("uncertainty score")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_summary(rows: list[dict], path) -> Path:
    """Bar chart of the improvement ratio per (score, metric) pair."""
    fig, ax = plt.subplots(figsize=(max(5.0, 0.6 * len(rows) + 2.0), 3.5))
    labels = [f"{r['score_name']}\n{r['metric_name']}" for r in rows]
    values = [r["ir"] for r in rows]
    ax.bar(range(len(rows)), values, color="tab:blue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("improvement ratio")
    ax.axhline(1.0, color="tab:green", ls="--", lw=1.0)
    ax.axhline(0.0, color="tab:gray", ls=":", lw=1.0)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
