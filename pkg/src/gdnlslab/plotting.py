"""SVG line plots of time series and their fitted power laws."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_series", "plot_loglog_fit"]

# fixed ids and no timestamp, so identical data gives identical files
matplotlib.rcParams["svg.hashsalt"] = "gdnlslab"
_META = {"Date": None, "Creator": "gdnlslab"}


def _save(fig, path):
    path = Path(path)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_series(path, x, series: dict, xlabel="t", ylabel="", title="", logx=False,
                logy=False):
    """One line per entry of ``series`` (label -> y values)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_loglog_fit(path, t, values, fit, label="data", title=""):
    """Measured series with the fitted ``amplitude * t^exponent`` over its window."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = values > 0
    ax.loglog(t[pos], values[pos], "o", ms=3, label=label)
    lo, hi = fit.window
    tt = np.geomspace(lo, hi, 50)
    ax.loglog(tt, fit.amplitude * tt ** fit.exponent, "-",
              label=f"fit: slope {fit.exponent:.3f}")
    ax.set_xlabel("t")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)
