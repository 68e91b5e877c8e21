"""Community detection, modularity and per-community reports."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from statistics import mean
from typing import Iterable, Sequence

from ..graph import GraphError, KnowledgeGraph, connected_components
from .centrality import betweenness_centrality, clustering_coefficient

GIRVAN_NEWMAN_MAX_NODES = 2000


@dataclass
class CommunityPartition:
    communities: list[set[int]]
    modularity: float
    method: str = "greedy_modularity"

    def membership(self) -> dict[int, int]:
        return {n: i for i, c in enumerate(self.communities) for n in c}


def _sorted(communities: Iterable[Iterable[int]]) -> list[set[int]]:
    comms = [set(c) for c in communities if c]
    return sorted(comms, key=lambda c: (-len(c), min(c)))


def modularity(g: KnowledgeGraph, communities: Sequence[Iterable[int]]) -> float:
    """Newman modularity ``sum_c (e_c/m - (d_c/2m)^2)``; 0 for an edgeless graph."""
    comms = [set(c) for c in communities]
    membership: dict[int, int] = {}
    for i, c in enumerate(comms):
        for n in c:
            if n in membership:
                raise GraphError(f"node {n} appears in more than one community")
            membership[n] = i
    if set(membership) != set(g.nodes()):
        raise GraphError("communities do not cover the node set")
    m = g.number_of_edges()
    if m == 0:
        return 0.0
    intra = [0] * len(comms)
    deg = [0] * len(comms)
    for e in g.edges():
        if membership[e.u] == membership[e.v]:
            intra[membership[e.u]] += 1
    for n, d in g.degrees().items():
        deg[membership[n]] += d
    return sum(intra[i] / m - (deg[i] / (2 * m)) ** 2 for i in range(len(comms)))


def refine_by_node_moves(g: KnowledgeGraph, communities: Sequence[Iterable[int]], max_rounds: int = 100) -> list[set[int]]:
    """Move single nodes to the neighbouring community (or a singleton) that most raises Q.

    Repeats in node-id order until no move gains more than 1e-12.
    """
    m = g.number_of_edges()
    if m == 0:
        return _sorted(communities)
    label: dict[int, int] = {}
    for i, c in enumerate(communities):
        for n in c:
            label[n] = i
    total = Counter()
    for n, c in label.items():
        total[c] += g.degree(n)
    fresh = len(communities)
    for _ in range(max_rounds):
        moved = False
        for v in g.nodes():
            kv = g.degree(v)
            if kv == 0:
                continue
            a = label[v]
            links = Counter(label[u] for u in g._adj[v])
            d_a = total[a] - kv
            base = links.get(a, 0) / m - kv * d_a / (2 * m * m)
            best, best_gain = None, 1e-12
            for b, k_vb in sorted(links.items()):
                if b == a:
                    continue
                gain = k_vb / m - kv * total[b] / (2 * m * m) - base
                if gain > best_gain:
                    best, best_gain = b, gain
            if best is None and -base > best_gain:
                best = fresh
                fresh += 1
            if best is not None:
                total[a] -= kv
                total[best] += kv
                label[v] = best
                moved = True
        if not moved:
            break
    groups: dict[int, set[int]] = {}
    for n, c in label.items():
        groups.setdefault(c, set()).add(n)
    return _sorted(groups.values())


def _greedy(g: KnowledgeGraph) -> list[set[int]]:
    import networkx as nx

    G = g.to_networkx()
    if G.number_of_edges() == 0:
        return _sorted({n} for n in g.nodes())
    comms = nx.community.greedy_modularity_communities(G)
    return refine_by_node_moves(g, comms)


def _first_split(g: KnowledgeGraph, nodes: set[int]) -> list[set[int]] | None:
    import networkx as nx

    sub = g.subgraph(nodes).to_networkx()
    if sub.number_of_edges() == 0:
        return None
    try:
        return [set(c) for c in next(nx.community.girvan_newman(sub))]
    except StopIteration:
        return None


def _girvan_newman(g: KnowledgeGraph) -> list[set[int]]:
    if len(g) > GIRVAN_NEWMAN_MAX_NODES:
        raise GraphError(
            f"girvan_newman is limited to {GIRVAN_NEWMAN_MAX_NODES} nodes (graph has {len(g)}); "
            "use method='greedy_modularity'"
        )
    # coarse level: first edge-removal split of every component
    coarse: list[set[int]] = []
    for comp in connected_components(g):
        split = _first_split(g, comp) if len(comp) > 2 else None
        coarse.extend(split or [comp])
    if modularity(g, coarse) < modularity(g, connected_components(g)):
        coarse = connected_components(g)
    # refined level: split each coarse community once more, kept only if Q rises
    current = list(coarse)
    q = modularity(g, current)
    for c in coarse:
        split = _first_split(g, c) if len(c) > 2 else None
        if not split:
            continue
        trial = [x for x in current if x is not c] + split
        q_trial = modularity(g, trial)
        if q_trial > q + 1e-12:
            current, q = trial, q_trial
    return _sorted(current)


def detect_communities(g: KnowledgeGraph, method: str = "greedy_modularity") -> CommunityPartition:
    if method == "greedy_modularity":
        comms = _greedy(g)
    elif method == "girvan_newman":
        comms = _girvan_newman(g)
    else:
        raise ValueError(f"unknown community method {method!r}")
    return CommunityPartition(comms, modularity(g, comms), method)


@dataclass
class CommunitySummary:
    index: int
    size: int
    avg_degree: float
    avg_clustering: float
    avg_betweenness_top: float
    top_nodes: list[str]
    intra_edges: int
    boundary_edges: int


@dataclass
class CommunityReport:
    communities: list[CommunitySummary] = field(default_factory=list)
    avg_intra_community_edges: float = 0.0
    avg_inter_community_edges: float = 0.0
    intra_edges: int = 0
    inter_edges: int = 0
    modularity: float = 0.0


def community_report(g: KnowledgeGraph, partition: CommunityPartition | Sequence[Iterable[int]],
                     betweenness: dict[int, float] | None = None, top_k: int = 5) -> CommunityReport:
    """Per-community size, degree, clustering and top-node betweenness.

    ``inter_edges`` counts edges whose endpoints lie in different communities;
    ``avg_inter_community_edges`` averages the per-community count of such
    boundary edges.
    """
    comms = partition.communities if isinstance(partition, CommunityPartition) else _sorted(partition)
    q = modularity(g, comms)
    bc = betweenness if betweenness is not None else betweenness_centrality(g)
    membership = {n: i for i, c in enumerate(comms) for n in c}
    intra = [0] * len(comms)
    boundary = [0] * len(comms)
    inter = 0
    for e in g.edges():
        cu, cv = membership[e.u], membership[e.v]
        if cu == cv:
            intra[cu] += 1
        else:
            inter += 1
            boundary[cu] += 1
            boundary[cv] += 1
    rows = []
    for i, c in enumerate(comms):
        top = sorted(c, key=lambda n: (-g.degree(n), g.label(n)))[:top_k]
        rows.append(CommunitySummary(
            index=i,
            size=len(c),
            avg_degree=mean(g.degree(n) for n in c),
            avg_clustering=mean(clustering_coefficient(g, n) for n in c),
            avg_betweenness_top=mean(bc[n] for n in top),
            top_nodes=[g.label(n) for n in top],
            intra_edges=intra[i],
            boundary_edges=boundary[i],
        ))
    k = len(comms) or 1
    return CommunityReport(rows, sum(intra) / k, sum(boundary) / k, sum(intra), inter, q)
