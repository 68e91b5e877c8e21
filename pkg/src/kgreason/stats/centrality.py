"""Clustering, betweenness and bridging centrality."""

from __future__ import annotations

from collections import deque

from ..graph import GraphError, KnowledgeGraph


def clustering_coefficient(g: KnowledgeGraph, node: int) -> float:
    if not g.has_node(node):
        raise GraphError(f"unknown node id {node}")
    adj = g._adj
    nbrs = list(adj[node])
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = sum(1 for i, a in enumerate(nbrs) for b in nbrs[i + 1:] if b in adj[a])
    return links / (k * (k - 1) / 2)


def avg_clustering(g: KnowledgeGraph) -> float:
    nodes = g.nodes()
    if not nodes:
        return 0.0
    return sum(clustering_coefficient(g, n) for n in nodes) / len(nodes)


def _accumulate(adj: dict[int, set[int]] | dict, source: int, bc: dict[int, float]) -> None:
    # single-source BFS, then back-propagate pair dependencies
    sigma = {source: 1}
    dist = {source: 0}
    preds: dict[int, list[int]] = {source: []}
    order = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                preds[w] = []
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = dict.fromkeys(order, 0.0)
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
        if w != source:
            bc[w] += delta[w]


def betweenness_centrality(g: KnowledgeGraph, normalized: bool = True) -> dict[int, float]:
    """Exact node betweenness over unordered pairs.

    With ``normalized`` the raw pair-dependency sum is divided by
    ``(N-1)(N-2)/2``, so the center of a star scores 1.
    """
    adj = g._adj
    bc = dict.fromkeys(g.nodes(), 0.0)
    for s in g.nodes():
        _accumulate(adj, s, bc)
    n = len(bc)
    # every unordered pair was counted from both endpoints
    scale = 0.5
    if normalized:
        scale = 1.0 / ((n - 1) * (n - 2)) if n > 2 else 0.0
    return {v: b * scale for v, b in bc.items()}


def bridging_coefficient(g: KnowledgeGraph, node: int) -> float:
    d = g.degree(node)
    if d == 0:
        return 0.0
    return (1.0 / d) / sum(1.0 / g.degree(u) for u in g.neighbors(node))


def bridging_centrality(g: KnowledgeGraph, betweenness: dict[int, float] | None = None) -> dict[int, float]:
    """Betweenness times the inverse-degree bridging coefficient."""
    bc = betweenness if betweenness is not None else betweenness_centrality(g)
    return {v: bc[v] * bridging_coefficient(g, v) for v in g.nodes()}


def top_nodes(scores: dict[int, float], g: KnowledgeGraph, n: int) -> list[int]:
    """Highest-scoring nodes, ties broken by label."""
    return sorted(scores, key=lambda v: (-scores[v], g.label(v)))[:n]
