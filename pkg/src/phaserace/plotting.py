"""Bar chart of harness metrics (optional ``--plot`` output of the bench command)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import BenchResult  # noqa: E402

_RATES = ("precision", "recall", "accuracy", "f1", "tpr", "fpr", "fnr", "tnr")


def plot_metrics(bench: BenchResult, path: str) -> None:
    m = bench.metrics
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), gridspec_kw={"width_ratios": [2, 1]})
    names = [k for k in _RATES]
    vals = [float(getattr(m, k)) if getattr(m, k) is not None else 0.0 for k in names]
    bars = ax1.bar(names, vals, color="0.45")
    for b, k in zip(bars, names):
        if getattr(m, k) is None:
            ax1.annotate("n/a", (b.get_x() + b.get_width() / 2, 0.02), ha="center")
    ax1.set_ylim(0, 1.05)
    ax1.set_ylabel("rate")
    ax1.tick_params(axis="x", rotation=45)
    ax1.set_title("detector rates")
    counts = [m.tp, m.fp, m.tn, m.fn]
    ax2.bar(["TP", "FP", "TN", "FN"], counts, color=["0.2", "0.6", "0.35", "0.8"])
    ax2.set_title(f"outcomes ({m.coverage} covered kernels)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
