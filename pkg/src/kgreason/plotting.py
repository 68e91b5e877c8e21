"""Matplotlib figures for the CLI report commands (Agg backend, PNG/PDF)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "svg.hashsalt": "kgreason",
    "pdf.fonttype": 42,
}


def figure(width: float = 4.5, height: float | None = None):
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height or width * golden))
    return fig, ax


def save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def plot_degree_histogram(counts: Sequence[int], edges: Sequence[float], path: str | Path) -> Path:
    fig, ax = figure()
    widths = np.diff(edges) if len(edges) > 1 else [1.0]
    ax.bar(edges[:-1], counts, width=widths, align="edge", color="#4c72b0", edgecolor="white")
    ax.set_yscale("log")
    ax.set_xlabel("log(1 + degree)")
    ax.set_ylabel("node count")
    return save(fig, path)


def plot_degree_loglog(degrees: Sequence[int], path: str | Path) -> Path:
    vals, freq = np.unique(np.asarray(degrees), return_counts=True)
    fig, ax = figure()
    ax.loglog(vals, freq, "o", ms=3, color="#4c72b0")
    ax.set_xlabel("degree")
    ax.set_ylabel("frequency")
    return save(fig, path)


def plot_ccdf(rows: Sequence[tuple[int, float, float]], path: str | Path, alpha: float | None = None) -> Path:
    k = np.array([r[0] for r in rows], dtype=float)
    emp = np.array([r[1] for r in rows])
    fit = np.array([r[2] for r in rows], dtype=float)
    fig, ax = figure()
    ax.loglog(k, emp, "o", ms=3, color="#4c72b0", label="empirical")
    ok = np.isfinite(fit)
    label = f"power law (alpha={alpha:.3f})" if alpha is not None else "power law"
    ax.loglog(k[ok], fit[ok], "--", color="#c44e52", label=label)
    ax.set_xlabel("degree k")
    ax.set_ylabel("P(K >= k)")
    ax.legend(frameon=False)
    return save(fig, path)


def plot_community_sizes(sizes: Sequence[int], path: str | Path, values: Sequence[float] | None = None,
                         ylabel: str = "size") -> Path:
    fig, ax = figure()
    y = values if values is not None else sizes
    ax.bar(np.arange(len(y)), y, color="#55a868")
    ax.set_xlabel("community index")
    ax.set_ylabel(ylabel)
    return save(fig, path)


def plot_clusters(projection: np.ndarray, assignment: Sequence[int], path: str | Path) -> Path:
    fig, ax = figure(4.5, 4.5)
    proj = np.asarray(projection)
    y = proj[:, 1] if proj.shape[1] > 1 else np.zeros(len(proj))
    ax.scatter(proj[:, 0], y, c=assignment, s=6, cmap="tab10")
    ax.set_xlabel("PC 1")
    ax.set_ylabel("PC 2")
    return save(fig, path)
