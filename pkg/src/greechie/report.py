"""Count-table output: delimited text plus a heatmap figure."""

from __future__ import annotations

import csv
import math
from typing import TextIO

from .generate import CountTable

CSV_FIELDS = ("atoms", "blocks", "total", "foot_free")


def write_csv(table: CountTable, fh: TextIO) -> int:
    """One row per non-empty (atoms, blocks) cell, ordered by blocks then atoms."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    rows = 0
    for (a, b) in sorted(table.cells, key=lambda k: (k[1], k[0])):
        total, free = table.get(a, b)
        w.writerow((a, b, total, free))
        rows += 1
    return rows


def plot_heatmap(table: CountTable, path: str, title: str = "Connected Greechie-3-L diagrams") -> None:
    """Atoms vs blocks heatmap of log10 counts, each cell annotated total/foot-free."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    if not table.cells:
        raise ValueError("empty count table")
    present = table.alphas()
    alphas = list(range(present[0], present[-1] + 1))
    betas = table.betas()
    grid = np.full((len(alphas), len(betas)), np.nan)
    for (a, b), (total, _) in table.cells.items():
        grid[alphas.index(a), betas.index(b)] = math.log10(total)

    fig, ax = plt.subplots(figsize=(1.0 + 0.7 * len(betas), 1.0 + 0.35 * len(alphas)))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(betas)), [str(b) for b in betas])
    ax.set_yticks(range(len(alphas)), [str(a) for a in alphas])
    ax.set_xlabel("blocks")
    ax.set_ylabel("atoms")
    ax.set_title(title)
    if len(alphas) * len(betas) <= 400:
        for (a, b), (total, free) in table.cells.items():
            ax.text(betas.index(b), alphas.index(a), f"{total}/{free}", ha="center", va="center", fontsize=6, color="w")
    fig.colorbar(im, ax=ax, label="log10 count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
