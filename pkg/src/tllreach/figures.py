"""Static figure rendering for planar problems and benchmark reports.

Figures are presentation only: every number they show also appears in the
JSON results, which remain the authoritative output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Polygon as MplPolygon, Rectangle

from tllreach.polytope import vertices_2d


def plot_reach(X0, boxes, path, pieces=None, title=None):
    """Draw X0, per-step reach boxes and optionally exact pieces (n = 2)."""
    if X0.dim != 2:
        raise ValueError("figures are only rendered for planar problems")
    fig, ax = plt.subplots(figsize=(6, 6))
    verts = vertices_2d(X0)
    if verts.shape[0] >= 3:
        ax.add_patch(
            MplPolygon(verts, closed=True, facecolor="#4878cf", alpha=0.45, edgecolor="#274b8f", label="X0")
        )
    if pieces is not None:
        for piece in pieces:
            pv = vertices_2d(piece)
            if pv.shape[0] >= 3:
                ax.add_patch(
                    MplPolygon(pv, closed=True, facecolor="#d65f5f", alpha=0.35, edgecolor="#8f2727")
                )
    cmap = plt.get_cmap("viridis")
    T = max(len(boxes), 1)
    for t, box in enumerate(boxes):
        color = cmap(0.2 + 0.7 * t / T)
        ax.add_patch(
            Rectangle(
                (box.lo[0], box.lo[1]),
                box.width[0],
                box.width[1],
                fill=False,
                edgecolor=color,
                linewidth=1.6,
                label=f"B_{t + 1}",
            )
        )
    ax.relim()
    ax.autoscale_view()
    ax.margins(0.08)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def plot_bench(report, path):
    """Median wall time per instance size and method."""
    sizes = sorted({inst["N"] for inst in report["instances"]})
    methods = report["methods"]
    fig, ax = plt.subplots(figsize=(6, 4))
    for method in methods:
        med = [report["medians"].get(f"{method}/N={N}", {}).get("wall_s") for N in sizes]
        ax.plot(sizes, med, marker="o", label=method)
    ax.set_xlabel("N = M")
    ax.set_ylabel("median wall time [s]")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
