"""Structural isomorphism between subgraphs of two knowledge graphs.

Candidate subgraphs (communities, ego networks of high-betweenness nodes and
whole components) are paired by size and degree sequence, then matched with a
VF2-style backtracking search that ignores labels and requires induced
isomorphism: both edges and non-edges are preserved.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

from .graph import GraphError, KnowledgeGraph, connected_components, giant_component
from .stats.centrality import betweenness_centrality, top_nodes
from .stats.community import detect_communities

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IsoConstraints:
    min_nodes: int = 15
    min_avg_degree: float = 2.0
    search_scope: str = "giant_components_only"
    ego_top: int = 20
    ego_hops: int = 2
    max_mappings: int = 5
    timeout: float = 5.0

    def __post_init__(self) -> None:
        if self.min_nodes < 2:
            raise ValueError("min_nodes must be >= 2")
        if self.search_scope not in ("giant_components_only", "full"):
            raise ValueError(f"unknown search_scope {self.search_scope!r}")


@dataclass
class CandidateSubgraph:
    origin: str
    nodes: frozenset[int]
    avg_degree: float
    size: int
    kind: str = ""
    cid: int = 0


@dataclass
class IsoMapping:
    node_pairs: dict[int, int]
    edge_pairs: list[tuple[tuple[int, int], tuple[int, int], str, str]] = field(default_factory=list)
    candidates: tuple[int, int] = (0, 0)

    def inverse(self) -> dict[int, int]:
        return {v: k for k, v in self.node_pairs.items()}


class MatchTimeout(Exception):
    pass


def _induced_avg_degree(g: KnowledgeGraph, nodes: set[int]) -> float:
    e = sum(1 for n in nodes for m in g._adj[n] if m in nodes) / 2
    return 2 * e / len(nodes) if nodes else 0.0


def _ego(g: KnowledgeGraph, center: int, hops: int) -> set[int]:
    keep = {center}
    frontier = {center}
    for _ in range(hops):
        frontier = {w for v in frontier for w in g._adj[v]} - keep
        keep |= frontier
    return keep


def enumerate_candidates(g: KnowledgeGraph, constraints: IsoConstraints = IsoConstraints(),
                         origin: str = "G") -> list[CandidateSubgraph]:
    """Connected induced subgraphs passing the size and average-degree filters."""
    if len(g) < constraints.min_nodes:
        return []
    scope = giant_component(g) if constraints.search_scope == "giant_components_only" else g
    pools: list[tuple[str, set[int]]] = []
    pools += [("component", c) for c in connected_components(scope)]
    pools += [("community", c) for c in detect_communities(scope).communities]
    bc = betweenness_centrality(scope)
    for hub in top_nodes(bc, scope, constraints.ego_top):
        pools.append(("ego", _ego(scope, hub, constraints.ego_hops)))

    seen: set[frozenset[int]] = set()
    out = []
    for kind, nodes in pools:
        key = frozenset(nodes)
        if key in seen or len(key) < constraints.min_nodes:
            continue
        seen.add(key)
        sub = scope.subgraph(key)
        if len(connected_components(sub)) != 1:
            continue
        avg = _induced_avg_degree(scope, set(key))
        if avg < constraints.min_avg_degree:
            continue
        out.append(CandidateSubgraph(origin, key, avg, len(key), kind))
    out.sort(key=lambda c: (-c.size, sorted(c.nodes)))
    for i, c in enumerate(out):
        c.cid = i
    return out


def _colors(adjs: list[dict[int, set[int]]], rounds: int = 3) -> list[dict[int, int]]:
    # colour refinement with a palette shared between graphs so colours are comparable
    cols = [{n: len(nb) for n, nb in adj.items()} for adj in adjs]
    for _ in range(rounds):
        palette: dict[tuple, int] = {}
        new = []
        for adj, col in zip(adjs, cols):
            sig = {n: (col[n], tuple(sorted(col[m] for m in adj[n]))) for n in adj}
            for s in sorted(set(sig.values())):
                palette.setdefault(s, len(palette))
            new.append({n: palette[s] for n, s in sig.items()})
        cols = new
    return cols


def match_structure(adj1: dict[int, set[int]], adj2: dict[int, set[int]], timeout: float = 5.0,
                    prefer: dict[int, int] | None = None) -> dict[int, int] | None:
    """One isomorphism between two graphs given as adjacency maps, or ``None``.

    ``prefer`` names a preferred image per node; it only orders the search.
    Raises :class:`MatchTimeout` when ``timeout`` seconds elapse.
    """
    if len(adj1) != len(adj2):
        return None
    if sorted(len(v) for v in adj1.values()) != sorted(len(v) for v in adj2.values()):
        return None
    if not adj1:
        return {}
    c1, c2 = _colors([adj1, adj2])
    if sorted(c1.values()) != sorted(c2.values()):
        return None
    by_color: dict[int, list[int]] = {}
    for n in sorted(adj2):
        by_color.setdefault(c2[n], []).append(n)

    # connectivity-first order: rarest colour first, then BFS by most mapped neighbours
    freq = {c: len(v) for c, v in by_color.items()}
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(adj1)
    while remaining:
        start = min(remaining, key=lambda n: (freq[c1[n]], -len(adj1[n]), n))
        order.append(start)
        placed.add(start)
        remaining.discard(start)
        while True:
            front = [n for n in remaining if adj1[n] & placed]
            if not front:
                break
            nxt = min(front, key=lambda n: (-len(adj1[n] & placed), freq[c1[n]], n))
            order.append(nxt)
            placed.add(nxt)
            remaining.discard(nxt)

    prefer = prefer or {}
    deadline = time.monotonic() + timeout
    f: dict[int, int] = {}
    used: set[int] = set()
    steps = 0

    def candidates(u: int) -> list[int]:
        mapped_nbrs = [f[w] for w in adj1[u] if w in f]
        if mapped_nbrs:
            pool = set.intersection(*(adj2[x] for x in mapped_nbrs))
            pool = [v for v in pool if c2[v] == c1[u] and v not in used]
        else:
            pool = [v for v in by_color[c1[u]] if v not in used]
        p = prefer.get(u)
        return sorted(pool, key=lambda v: (v != p, v))

    def feasible(u: int, v: int) -> bool:
        for w, x in f.items():
            if (w in adj1[u]) != (x in adj2[v]):
                return False
        return True

    def extend(i: int) -> bool:
        nonlocal steps
        if i == len(order):
            return True
        steps += 1
        if steps % 256 == 0 and time.monotonic() > deadline:
            raise MatchTimeout
        u = order[i]
        for v in candidates(u):
            if feasible(u, v):
                f[u] = v
                used.add(v)
                if extend(i + 1):
                    return True
                del f[u]
                used.discard(v)
        return False

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, len(order) + 500))
    try:
        return dict(f) if extend(0) else None
    finally:
        sys.setrecursionlimit(limit)


def _adjacency(g: KnowledgeGraph, nodes) -> dict[int, set[int]]:
    nodes = set(nodes)
    return {n: g._adj[n].keys() & nodes for n in nodes}


def _edge_pairs(g1: KnowledgeGraph, g2: KnowledgeGraph, f: dict[int, int]):
    pairs = []
    for u in sorted(f):
        for w in sorted(g1._adj[u]):
            if w in f and u < w:
                e1, e2 = g1.edge(u, w), g2.edge(f[u], f[w])
                pairs.append(((u, w), (f[u], f[w]), e1.relation, e2.relation if e2 else ""))
    return pairs


def find_isomorphic_subgraphs(g1: KnowledgeGraph, g2: KnowledgeGraph,
                              constraints: IsoConstraints = IsoConstraints()) -> tuple[list[IsoMapping], list[tuple[int, int]]]:
    """Mappings between equal-shaped candidate subgraphs of ``g1`` and ``g2``.

    Returns ``(mappings, skipped)`` where ``skipped`` lists candidate pairs that
    hit the per-pair timeout. At most ``constraints.max_mappings`` mappings are
    returned, largest candidates first.
    """
    if len(g1) == 0 or len(g2) == 0:
        raise GraphError("both graphs must be non-empty")
    c1 = enumerate_candidates(g1, constraints, "G1")
    c2 = enumerate_candidates(g2, constraints, "G2")
    by_label2 = {g2.label(n): n for n in g2.nodes()}
    mappings: list[IsoMapping] = []
    skipped: list[tuple[int, int]] = []
    found: set[frozenset] = set()
    for a in c1:
        adj_a = _adjacency(g1, a.nodes)
        seq_a = sorted(len(v) for v in adj_a.values())
        for b in c2:
            if len(mappings) >= constraints.max_mappings:
                return mappings, skipped
            if a.size != b.size:
                continue
            adj_b = _adjacency(g2, b.nodes)
            if sorted(len(v) for v in adj_b.values()) != seq_a:
                continue
            prefer = {n: by_label2[g1.label(n)] for n in a.nodes if by_label2.get(g1.label(n)) in b.nodes}
            try:
                f = match_structure(adj_a, adj_b, constraints.timeout, prefer)
            except MatchTimeout:
                log.warning("isomorphism search timed out on candidates %d/%d", a.cid, b.cid)
                skipped.append((a.cid, b.cid))
                continue
            if f is None:
                continue
            key = frozenset(f.items())
            if key in found:
                continue
            found.add(key)
            m = IsoMapping(f, _edge_pairs(g1, g2, f), (a.cid, b.cid))
            if not verify_mapping(g1, g2, m):
                raise AssertionError("matcher produced an invalid mapping")
            mappings.append(m)
    return mappings, skipped


def verify_mapping(g1: KnowledgeGraph, g2: KnowledgeGraph, mapping: IsoMapping | dict[int, int]) -> bool:
    f = mapping.node_pairs if isinstance(mapping, IsoMapping) else mapping
    if len(set(f.values())) != len(f):
        return False
    if not all(g1.has_node(u) and g2.has_node(v) for u, v in f.items()):
        return False
    dom = sorted(f)
    for i, u in enumerate(dom):
        for w in dom[i + 1:]:
            if g1.has_edge(u, w) != g2.has_edge(f[u], f[w]):
                return False
    return True


@dataclass
class MappingReport:
    node_rows: list[tuple[str, str, str]]
    edge_rows: list[tuple[str, str, str]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "G1", "G2", "reasoning"])
        for row in self.node_rows:
            w.writerow(["node", *row])
        for row in self.edge_rows:
            w.writerow(["edge", *row])
        return buf.getvalue()

    def to_latex(self) -> str:
        def esc(s: str) -> str:
            for a, b in (("\\", r"\textbackslash{}"), ("&", r"\&"), ("%", r"\%"), ("_", r"\_"), ("#", r"\#"),
                         ("$", r"\$"), ("{", r"\{"), ("}", r"\}")):
                s = s.replace(a, b)
            return s

        def table(head: tuple[str, str], rows) -> list[str]:
            lines = [r"\begin{tabular}{|p{4cm}|p{4cm}|p{8cm}|}", r"\hline",
                     rf"\textbf{{{head[0]}}} & \textbf{{{head[1]}}} & \textbf{{Reasoning}} \\", r"\hline"]
            for a, b, r in rows:
                lines += [f"{esc(a)} & {esc(b)} & {esc(r)} \\\\", r"\hline"]
            lines.append(r"\end{tabular}")
            return lines

        out = table(("G1 Node", "G2 Node"), self.node_rows) + [""]
        out += table(("G1 Edge (Label)", "G2 Edge (Label)"), self.edge_rows)
        return "\n".join(out) + "\n"


def mapping_report(g1: KnowledgeGraph, g2: KnowledgeGraph, mapping: IsoMapping) -> MappingReport:
    """Node and edge correspondence rows with an empty reasoning column."""
    if not verify_mapping(g1, g2, mapping):
        raise GraphError("mapping does not preserve adjacency")
    f = mapping.node_pairs
    nodes = [(g1.label(u), g2.label(f[u]), "") for u in sorted(f)]
    edges = []
    for (u, w), (x, y), r1, r2 in _edge_pairs(g1, g2, f):
        edges.append((f"('{g1.label(u)}', '{g1.label(w)}') ('{r1}')", f"('{g2.label(x)}', '{g2.label(y)}') ('{r2}')", ""))
    return MappingReport(nodes, edges)
