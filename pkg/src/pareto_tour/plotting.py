"""Figure rendering for the report path.

Every CLI command that writes delimited output can drop a PNG next to it:
front scatter plots for solver archives and the decomposition-versus-
scalarization comparison for the concave demo. Uses the Agg backend only;
nothing here opens a window.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core import ObjectiveVector  # noqa: E402

_STYLE = {
    "figure.figsize": (6.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


def save_front_figure(
    path: str | Path,
    fronts: Sequence[tuple[str, Sequence[ObjectiveVector]]],
    ref: tuple[float, float] | None = None,
    title: str = "Pareto front",
) -> Path:
    """Scatter one or more labelled fronts; optionally draw the reference box."""
    path = Path(path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for label, points in fronts:
            pts = sorted((p.f1, p.f2) for p in points)
            if not pts:
                continue
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                marker="o",
                markersize=4,
                linestyle="--",
                linewidth=0.8,
                label=f"{label} ({len(pts)})",
            )
        if ref is not None:
            ax.axvline(ref[0], color="gray", linestyle=":", linewidth=1)
            ax.axhline(ref[1], color="gray", linestyle=":", linewidth=1)
        ax.set_xlabel("objective 1")
        ax.set_ylabel("objective 2")
        ax.set_title(title)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path


def save_concave_figure(
    path: str | Path,
    decomposition: Sequence[ObjectiveVector],
    scalarization: Sequence[ObjectiveVector],
    attainable: Sequence[tuple[float, float]] = (),
) -> Path:
    """Comparison plot: attainable cloud, cone-decomposition and scalarization
    solutions."""
    path = Path(path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if attainable:
            ax.scatter(
                [p[0] for p in attainable],
                [p[1] for p in attainable],
                s=2,
                c="#9ecae1",
                label="attainable",
                rasterized=True,
            )
        ax.scatter(
            [p.f1 for p in decomposition],
            [p.f2 for p in decomposition],
            s=26,
            c="red",
            label=f"decomposition ({len(decomposition)})",
            zorder=3,
        )
        ax.scatter(
            [p.f1 for p in scalarization],
            [p.f2 for p in scalarization],
            s=26,
            c="green",
            marker="x",
            label=f"scalarization ({len(scalarization)})",
            zorder=4,
        )
        ax.set_xlabel("objective 1")
        ax.set_ylabel("objective 2")
        ax.set_title("Concave front: decomposition vs linear scalarization")
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path
