from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..graph import GraphError, KnowledgeGraph


@dataclass(frozen=True)
class DegreeStats:
    node_count: int
    edge_count: int
    avg_degree: float
    max_degree: int
    min_degree: int
    median_degree: int
    density: float

    def as_dict(self) -> dict:
        return asdict(self)


def stats_from_counts(node_count: int, edge_count: int) -> tuple[float, float]:
    """Average degree and density implied by node/edge counts."""
    if node_count < 1:
        raise GraphError("degree statistics need at least one node")
    avg = 2 * edge_count / node_count
    density = 2 * edge_count / (node_count * (node_count - 1)) if node_count >= 2 else 0.0
    return avg, density


def degree_stats(g: KnowledgeGraph) -> DegreeStats:
    degs = sorted(g.degrees().values())
    if not degs:
        raise GraphError("degree statistics of an empty graph are undefined")
    n, e = len(degs), g.number_of_edges()
    avg, density = stats_from_counts(n, e)
    # lower middle for even counts
    median = degs[(n - 1) // 2]
    return DegreeStats(n, e, avg, degs[-1], degs[0], median, density)


def degree_histogram_log1p(g: KnowledgeGraph, bins: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Counts of ``log1p(degree)`` in ``bins`` equal-width bins.

    Returns ``(counts, edges)`` where ``edges`` has ``bins + 1`` entries spanning
    ``[log1p(min degree), log1p(max degree)]``; the last bin is closed.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    degs = np.fromiter(g.degrees().values(), dtype=float)
    if degs.size == 0:
        raise GraphError("histogram of an empty graph is undefined")
    x = np.log1p(degs)
    lo, hi = float(x.min()), float(x.max())
    edges = np.linspace(lo, hi, bins + 1)
    if hi == lo:
        counts = np.zeros(bins, dtype=int)
        counts[0] = x.size
        return counts, edges
    counts, _ = np.histogram(x, bins=edges)
    return counts.astype(int), edges
