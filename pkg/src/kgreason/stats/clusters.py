from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embedding import NodeEmbeddingIndex


@dataclass
class ClusterReport:
    n_clusters: int
    members: list[list[int]]
    nearest_labels: list[list[str]]
    projection: np.ndarray
    assignment: np.ndarray


def cluster_report(index: NodeEmbeddingIndex, n_clusters: int = 5, n_components: int = 2,
                   seed: int = 42, n_nearest: int = 10) -> ClusterReport:
    """PCA-project node embeddings, run k-means and list labels nearest each centroid."""
    from sklearn.cluster import KMeans
    from sklearn.decomposition import PCA

    n = len(index)
    if n_clusters < 1 or n_clusters > n:
        raise ValueError(f"n_clusters must lie in [1, {n}], got {n_clusters}")
    dims = min(n_components, n, index.vectors.shape[1])
    proj = PCA(n_components=dims, random_state=seed).fit_transform(index.vectors) if n > 1 else np.zeros((1, dims))
    km = KMeans(n_clusters=n_clusters, init="k-means++", n_init=10, random_state=seed).fit(proj)
    members, nearest = [], []
    for c in range(n_clusters):
        rows = np.flatnonzero(km.labels_ == c)
        dist = np.linalg.norm(proj[rows] - km.cluster_centers_[c], axis=1)
        order = rows[np.lexsort((np.array([index.labels[r] for r in rows]), dist))] if rows.size else rows
        members.append([index.ids[r] for r in rows])
        nearest.append([index.labels[r] for r in order[:n_nearest]])
    return ClusterReport(n_clusters, members, nearest, proj, km.labels_.copy())
