"""SVG figures for run directories (matplotlib, non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import DecayFit  # noqa: E402

_RC = {
    "font.family": "serif",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.5, 4.0),
    "svg.hashsalt": "aniso4nls",  # stable element ids across runs
    "svg.fonttype": "none",
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def loglog_plot(
    path: str | Path,
    series: dict,
    fit: DecayFit | None = None,
    title: str = "",
    xlabel: str = "t",
    ylabel: str = "",
    reference_slope: float | None = None,
) -> Path:
    """Log-log plot of named (t, value) series with an optional fitted line."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for label, (t, v) in series.items():
            t, v = np.asarray(t, float), np.asarray(v, float)
            ok = v > 0
            ax.loglog(t[ok], v[ok], "o-", ms=3, lw=1, label=label)
        if fit is not None:
            tt = np.geomspace(*fit.window, 50)
            ax.loglog(tt, fit.predict(tt), "k--", lw=1, label=f"fit: slope {fit.exponent:.3f}")
            if reference_slope is not None:
                t0 = fit.window[0]
                ref = fit.predict(t0) * (tt / t0) ** reference_slope
                ax.loglog(tt, ref, ":", color="gray", lw=1, label=f"slope {reference_slope:.3f}")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, fontsize=8)
        return _save(fig, path)


def line_plot(path: str | Path, x, ys: dict, title: str = "", xlabel: str = "t", ylabel: str = "",
              logy: bool = False) -> Path:
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for label, y in ys.items():
            (ax.semilogy if logy else ax.plot)(x, y, lw=1, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(ys) > 1:
            ax.legend(frameon=False, fontsize=8)
        return _save(fig, path)


def bar_plot(path: str | Path, labels, values, title: str = "", ylabel: str = "") -> Path:
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.bar(range(len(values)), values)
        ax.set_xticks(range(len(values)), labels, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        return _save(fig, path)
