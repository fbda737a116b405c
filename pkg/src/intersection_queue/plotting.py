"""SVG figures for sweep heatmaps and delay-vs-rate curves.

Figures are rendered to SVG with matplotlib and written
atomically.  A fixed hash salt and no date metadata keep the output stable
across runs.
"""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import LinePoint, SweepCell, atomic_write  # noqa: E402

BOUNDARY_GID = "stability-boundary"

_RC = {
    "svg.hashsalt": "intersection-queue",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": False,
}


def _edges(centers: np.ndarray) -> np.ndarray:
    if len(centers) == 1:
        half = 0.5 * max(centers[0], 0.01)
        return np.array([centers[0] - half, centers[0] + half])
    mids = 0.5 * (centers[1:] + centers[:-1])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _save_svg(fig, path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def heatmap_svg(
    cells: Sequence[SweepCell],
    boundary: Sequence[tuple[float, float]],
    path,
    cutoff: float = 120.0,
    title: str = "",
) -> None:
    """Cells shaded by mean delay (clamped at ``cutoff``) with the criterion boundary overlaid."""
    l1 = np.array(sorted({c.lambda1 for c in cells}))
    l2 = np.array(sorted({c.lambda2 for c in cells}))
    grid = np.full((len(l2), len(l1)), np.nan)
    i1 = {v: i for i, v in enumerate(l1)}
    i2 = {v: i for i, v in enumerate(l2)}
    for c in cells:
        grid[i2[c.lambda2], i1[c.lambda1]] = min(c.mean_delay, cutoff)

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 5.0))
        mesh = ax.pcolormesh(_edges(l1), _edges(l2), grid, cmap="Greys", vmin=0.0, vmax=cutoff)
        fig.colorbar(mesh, ax=ax, label=f"mean delay [s] (clamped at {cutoff:g})")
        flagged = [c for c in cells if c.diverged]
        if flagged:
            ax.plot(
                [c.lambda1 for c in flagged],
                [c.lambda2 for c in flagged],
                "x",
                color="tab:orange",
                label="diverged",
            )
        if boundary:
            bx, by = zip(*boundary)
            ax.plot(bx, by, "-", color="red", linewidth=1.5, label="criterion boundary", gid=BOUNDARY_GID)
        ax.set_xlim(_edges(l1)[0], _edges(l1)[-1])
        ax.set_ylim(_edges(l2)[0], _edges(l2)[-1])
        ax.set_xlabel(r"$\lambda_1$ [veh/s]")
        ax.set_ylabel(r"$\lambda_2$ [veh/s]")
        if title:
            ax.set_title(title)
        if flagged or boundary:
            ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        _save_svg(fig, path)


def line_svg(
    series: Sequence[tuple[str, Sequence[LinePoint], float | None]],
    path,
    title: str = "",
) -> None:
    """One curve pair per series: simulated delay (solid) and analytical bound (dashed).

    Each series is ``(label, points, critical_rate)``; a dotted vertical line
    marks ``critical_rate`` when given.
    """
    colors = ["red", "black", "tab:blue", "tab:green"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for k, (label, points, critical) in enumerate(series):
            color = colors[k % len(colors)]
            lam = np.array([p.lam for p in points])
            ax.errorbar(
                lam,
                [p.mean_delay for p in points],
                yerr=[p.ci_half_width for p in points],
                fmt="-o",
                markersize=3,
                color=color,
                label=f"{label} simulated",
            )
            bounded = [(p.lam, p.bound) for p in points if p.bound is not None]
            if bounded:
                bx, by = zip(*bounded)
                ax.plot(bx, by, "--", color=color, label=f"{label} bound")
            if critical is not None:
                ax.axvline(critical, linestyle=":", color="gray")
        ax.set_xlabel(r"$\lambda_1 = \lambda_2$ [veh/s]")
        ax.set_ylabel("mean delay [s]")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=8)
        fig.tight_layout()
        _save_svg(fig, path)
