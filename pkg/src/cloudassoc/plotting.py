"""Figures for the experiment CSVs, written next to the data files."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def figsize(scale: float = 1.0) -> tuple:
    width = 5.0 * scale
    return width, width * (math.sqrt(5.0) - 1.0) / 2.0


def new_figure(scale: float = 1.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(scale))
    return fig, ax


def save(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(STYLE):
        fig.savefig(path)
    plt.close(fig)
    return path


def plot_fig1(results, path) -> Path:
    """Sum-rate per realization for DCAA, CHCAA and the cloud-less baseline."""
    x = [r.index + 1 for r in results]
    with plt.rc_context(STYLE):
        fig, ax = new_figure()
        ax.plot(x, [r.dcaa_rate for r in results], "o-", ms=3, label="DCAA")
        ax.plot(x, [r.chcaa_rate for r in results], "s--", ms=3, mfc="none", label="CHCAA")
        ax.plot(x, [r.baseline_rate for r in results], "^:", ms=3, label="BS association (no clouds)")
        ax.set_xlabel("Channel realization")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_ylabel("Sum-rate (bps/Hz)")
        ax.legend(loc="best")
    return save(fig, path)


def plot_fig2(rows, path) -> Path:
    """Mean percentage sum-rate gain of DCAA against the baseline, per user count."""
    with plt.rc_context(STYLE):
        fig, ax = new_figure()
        ax.plot([r.num_users for r in rows], [r.mean_gain_percent for r in rows], "o-")
        ax.set_xlabel("Total number of users")
        ax.set_ylabel("Sum-rate gain (%)")
        ax.set_xticks([r.num_users for r in rows])
    return save(fig, path)


def plot_iterations(iterations, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = new_figure(0.8)
        lo, hi = min(iterations), max(iterations)
        ax.hist(iterations, bins=range(lo, hi + 2), align="left", rwidth=0.85)
        ax.set_xlabel("Iterations to convergence")
        ax.set_ylabel("Runs")
    return save(fig, path)
