"""Figure rendering for the CLI report paths (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dyadic import PiecewiseConstantFn
from .wigner import WignerGrid


def save_spy(path, rows, cols, dim: int, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(cols, rows, s=max(0.2, 2000.0 / dim), marker="s", color="k")
    ax.set_xlim(-0.5, dim - 0.5)
    ax.set_ylim(dim - 0.5, -0.5)
    ax.set_aspect("equal")
    ax.set_title(title)
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_function(path, fn: PiecewiseConstantFn, title: str,
                  ylabel: str = "value") -> None:
    edges = np.arange(fn.n_cells + 1) / fn.n_cells
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.stairs(np.real(fn.values), edges, baseline=None, color="tab:blue")
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_spectrum(path, spectrum_rows) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [row[0] for row in spectrum_rows]
    energies = [row[3] for row in spectrum_rows]
    ax.scatter(ns, energies, s=12, color="tab:red")
    ax.set_xlabel("scale n")
    ax.set_ylabel("eigenvalue")
    ax.set_title("detail-block spectrum")
    ax.grid(alpha=0.3)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_wigner_frame(path, grid: WignerGrid, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 5))
    vmax = float(np.max(np.abs(grid.values))) or 1.0
    img = ax.imshow(grid.values.T, origin="lower", cmap="RdBu_r",
                    vmin=-vmax, vmax=vmax,
                    extent=[grid.q_min, grid.q_max, grid.p_min, grid.p_max])
    fig.colorbar(img, ax=ax, shrink=0.85)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_centroids(path, points: np.ndarray, expected_center, fitted_center) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(points[:, 0], points[:, 1], "o-", ms=3, label="centroid")
    ax.plot(*expected_center, "k+", ms=12, label="expected center")
    ax.plot(*fitted_center, "rx", ms=10, label="fitted center")
    ax.set_aspect("equal")
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.legend(fontsize=8)
    ax.set_title("centroid trajectory")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_bench(path, rows) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    levels = [row["L"] for row in rows]
    ax.semilogy(levels, [row["grid_seconds"] for row in rows], "o-",
                label="grid apply")
    ax.semilogy(levels, [row["fast_seconds"] for row in rows], "s-",
                label="block fast path")
    dense = [(row["L"], row["dense_seconds"]) for row in rows
             if row["dense_seconds"] is not None]
    if dense:
        ax.semilogy([d[0] for d in dense], [d[1] for d in dense], "^-",
                    label="dense mat-vec")
    ax.set_xlabel("level L")
    ax.set_ylabel("seconds")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    ax.set_title("operator application timings")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
