"""Figures for failure-rate curves. Needs matplotlib (the ``plot`` extra)."""

from __future__ import annotations

import math
from pathlib import Path

GOLDEN = (math.sqrt(5) - 1) / 2
FIG_WIDTH = 4.5  # inches

RC_PARAMS = {
    "figure.figsize": (FIG_WIDTH, FIG_WIDTH * GOLDEN),
    "figure.dpi": 150,
    "font.size": 8,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "lines.markersize": 4,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_compare(rows: list[dict], path: str | Path, title: str | None = None) -> Path:
    """Certified bound and Monte Carlo estimate against the error weight, on a log scale.

    ``rows`` carries ``t``, ``bound_log2``, ``dfr_hat`` and ``stderr`` as
    written by the compare pipeline. Zero values cannot sit on a log axis and
    are left out.
    """
    plt = _pyplot()
    path = Path(path)
    with plt.rc_context(RC_PARAMS):
        fig, ax = plt.subplots()
        tb = [r["t"] for r in rows if math.isfinite(r["bound_log2"])]
        yb = [2.0 ** r["bound_log2"] for r in rows if math.isfinite(r["bound_log2"])]
        ax.plot(tb, yb, "-", color="#08589e", label="certified bound")
        sim = [r for r in rows if r.get("dfr_hat") and r["dfr_hat"] > 0]
        if sim:
            ax.errorbar([r["t"] for r in sim], [r["dfr_hat"] for r in sim],
                        yerr=[3 * r["stderr"] for r in sim], fmt="o", color="#d95f0e",
                        capsize=2, label="simulated (3 s.e.)")
        ax.set_yscale("log")
        ax.set_xlabel("error weight t")
        ax.set_ylabel("failure rate")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
