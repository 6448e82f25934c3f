"""Figure rendering for the CLI reports.

Figures are written as self-contained SVG files (fonts rendered to
paths, fixed 800x600 viewport) next to the CSV output; the CSV remains
the source of truth.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .measures import weight_v

__all__ = ["save_decay_svg", "save_weight_svg"]

_FIGSIZE = (800 / 72, 600 / 72)  # 800x600 pt SVG viewport
_METADATA = {"Date": None}  # keep output stable across reruns

plt.rcParams["svg.fonttype"] = "path"


def save_decay_svg(path, times, v_dist, envelope, label="initial condition"):
    """Log-log decay plot: measured V-distance as markers, envelope as a line."""
    times = np.asarray(times, dtype=float)
    v = np.asarray(v_dist, dtype=float)
    env = np.asarray(envelope, dtype=float)
    pos = times > 0
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.loglog(times[pos], v[pos], "*", markersize=5, label="measured distance")
    ax.loglog(times[pos], env[pos], "-", linewidth=1.5, label="certified envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted distance to the folded limit")
    ax.set_title(f"Decay toward the folded limit ({label})")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, format="svg", metadata=_METADATA)
    plt.close(fig)


def save_weight_svg(path, h, periods=5):
    """The confinement weight V over a few periods, with dots at multiples of h
    where it is only left continuous."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for k in range(periods):
        y = np.linspace(k * h, (k + 1) * h, 200, endpoint=False)
        ax.plot(y, weight_v(y, h), "-", color="C0")
    knots = h * np.arange(periods)
    ax.plot(knots, weight_v(knots, h), "o", color="C0", markersize=4)
    ax.set_xlabel("y")
    ax.set_ylabel("V(y)")
    ax.set_ylim(0.9, 2.05)
    ax.set_title(f"Confinement weight V (h = {h:g})")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", metadata=_METADATA)
    plt.close(fig)
