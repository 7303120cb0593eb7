"""Render sweep tables to PNG files: heat maps and cut-line profiles.

matplotlib is imported lazily with the Agg backend so library users who
never render pay no import cost and no display is required.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .quantifiers import SweepTable


def _axes_and_grids(table: SweepTable):
    lams = sorted({c.lam for c in table.cells})
    avals = sorted({c.a for c in table.cells})
    li = {v: i for i, v in enumerate(lams)}
    ai = {v: i for i, v in enumerate(avals)}
    shape = (len(avals), len(lams))          # rows = a for plotting
    ic = np.full(shape, np.nan)
    cf = np.full(shape, np.nan)
    kv = np.full(shape, np.nan)
    for c in table.cells:
        r, col = ai[c.a], li[c.lam]
        kv[r, col] = c.kcbs
        if c.ic is not None:
            ic[r, col] = c.ic
        if c.cf is not None:
            cf[r, col] = c.cf
    return np.array(lams), np.array(avals), ic, cf, kv


def _heat(ax, lams, avals, grid, title):
    mesh = ax.pcolormesh(lams, avals, grid, shading="nearest", cmap="viridis")
    ax.set_xlabel("lambda")
    ax.set_ylabel("a")
    ax.set_title(title)
    return mesh


def render_sweep_figures(table: SweepTable, out_dir, stem: str = "sweep"):
    """Write heat-map and cut-profile PNGs; returns the paths written."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lams, avals, ic, cf, _ = _axes_and_grids(table)
    written = []

    panels = []
    if table.which in ("ic", "both") and not np.all(np.isnan(ic)):
        panels.append(("ic", ic, "invasiveness cost"))
    if table.which in ("cf", "both") and not np.all(np.isnan(cf)):
        panels.append(("cf", cf, "contextual fraction"))

    for name, grid, title in panels:
        fig, ax = plt.subplots(figsize=(5.0, 4.0), constrained_layout=True)
        mesh = _heat(ax, lams, avals, grid, title)
        fig.colorbar(mesh, ax=ax)
        path = out_dir / f"{stem}_{name}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    if panels:
        a_cut = float(avals.max())
        lam_cut = float(lams.max())
        row = int(np.argmax(avals == a_cut))
        col = int(np.argmax(lams == lam_cut))
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2),
                                       constrained_layout=True)
        for name, grid, _ in panels:
            ax1.plot(lams, grid[row, :], marker="o", ms=3, label=name)
            ax2.plot(avals, grid[:, col], marker="o", ms=3, label=name)
        ax1.set_xlabel("lambda")
        ax1.set_title(f"cut at a = {a_cut:g}")
        ax2.set_xlabel("a")
        ax2.set_title(f"cut at lambda = {lam_cut:g}")
        for ax in (ax1, ax2):
            ax.legend()
            ax.grid(True, alpha=0.3)
        path = out_dir / f"{stem}_cuts.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    return written
