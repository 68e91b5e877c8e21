"""Knowledge-graph data model and structural transformations.

A :class:`KnowledgeGraph` is an undirected graph over normalized concept labels.
Repeated assertions between the same pair of concepts collapse into a single
edge record that counts how often the pair was asserted and keeps every
distinct relation text.
"""

from __future__ import annotations

import copy
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence

RELATION_SEPARATOR = "; "

_WS = re.compile(r"\s+")


class GraphError(ValueError):
    """Raised for invalid graph operations."""


def normalize_label(text: str) -> str:
    """Lowercase, trim and collapse internal whitespace."""
    return _WS.sub(" ", str(text)).strip().lower()


@dataclass(frozen=True)
class Triple:
    """One (subject, relation, object) assertion.

    Use :meth:`of` to build a triple with normalized labels. The plain
    constructor stores values as given so invalid records can still be
    reported by :func:`build_from_triples`.
    """

    subject: str
    relation: str
    object: str
    source_chunk: str | None = None

    @classmethod
    def of(cls, subject: str, relation: str, obj: str, source_chunk: str | None = None) -> "Triple":
        return cls(normalize_label(subject), _WS.sub(" ", str(relation)).strip(), normalize_label(obj), source_chunk)

    def problem(self) -> str | None:
        """Return why the triple is unusable, or ``None`` if it is valid."""
        s, o = normalize_label(self.subject), normalize_label(self.object)
        if not s or not o:
            return "empty label"
        if s == o:
            return "self-loop"
        return None


@dataclass
class Node:
    id: int
    label: str
    aliases: list[str] = field(default_factory=list)


@dataclass
class Edge:
    u: int
    v: int
    relations: list[str] = field(default_factory=list)
    multiplicity: int = 1
    sources: list[str] = field(default_factory=list)

    @property
    def relation(self) -> str:
        return RELATION_SEPARATOR.join(self.relations)

    def other(self, node_id: int) -> int:
        return self.v if node_id == self.u else self.u

    def absorb(self, relations: Iterable[str], multiplicity: int, sources: Iterable[str] = ()) -> None:
        for r in relations:
            if r and r not in self.relations:
                self.relations.append(r)
        for s in sources:
            if s not in self.sources:
                self.sources.append(s)
        self.multiplicity += multiplicity


@dataclass(frozen=True)
class MergeGroup:
    """A set of node ids to collapse onto ``canonical``."""

    members: frozenset[int]
    canonical: int

    def __post_init__(self) -> None:
        if not self.members:
            raise GraphError("merge group must not be empty")
        if self.canonical not in self.members:
            raise GraphError("canonical node must be a member of its group")

    @classmethod
    def choose(cls, g: "KnowledgeGraph", members: Iterable[int]) -> "MergeGroup":
        """Pick the highest-degree member as canonical; ties go to the smallest label."""
        members = frozenset(members)
        canonical = min(members, key=lambda n: (-g.degree(n), g.label(n)))
        return cls(members, canonical)


class KnowledgeGraph:
    """Undirected labeled graph with collapsed parallel edges.

    Node ids are assigned in first-seen order and are never reused, so ids
    stay stable across merges and pruning.
    """

    def __init__(self, metadata: dict[str, Any] | None = None) -> None:
        self._nodes: dict[int, Node] = {}
        self._by_label: dict[str, int] = {}
        self._adj: dict[int, dict[int, Edge]] = {}
        self._next_id = 0
        self.metadata: dict[str, Any] = dict(metadata or {})

    # ------------------------------------------------------------------ nodes
    def add_node(self, label: str, node_id: int | None = None) -> int:
        """Return the id of ``label``, creating the node if needed."""
        label = normalize_label(label)
        if not label:
            raise GraphError("node label is empty after normalization")
        if label in self._by_label:
            return self._by_label[label]
        if node_id is None:
            node_id = self._next_id
        elif node_id in self._nodes:
            raise GraphError(f"node id {node_id} already in use")
        self._nodes[node_id] = Node(node_id, label)
        self._by_label[label] = node_id
        self._adj[node_id] = {}
        self._next_id = max(self._next_id, node_id + 1)
        return node_id

    def remove_nodes(self, node_ids: Iterable[int]) -> None:
        for n in list(node_ids):
            node = self._nodes.pop(n)
            del self._by_label[node.label]
            for m in self._adj.pop(n):
                del self._adj[m][n]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None

    def label(self, node_id: int) -> str:
        return self.node(node_id).label

    def node_id(self, label: str) -> int:
        try:
            return self._by_label[normalize_label(label)]
        except KeyError:
            raise GraphError(f"unknown node label {label!r}") from None

    def find(self, label: str) -> int | None:
        return self._by_label.get(normalize_label(label))

    def nodes(self) -> list[int]:
        return sorted(self._nodes)

    def labels(self) -> set[str]:
        return set(self._by_label)

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, label: str) -> bool:
        return normalize_label(label) in self._by_label

    @property
    def next_id(self) -> int:
        return self._next_id

    # ------------------------------------------------------------------ edges
    def add_edge(
        self,
        a: str | int,
        b: str | int,
        relation: str | Sequence[str] = (),
        multiplicity: int = 1,
        sources: Iterable[str] = (),
    ) -> Edge:
        """Add or reinforce the edge between ``a`` and ``b`` (labels or ids)."""
        u = a if isinstance(a, int) else self.add_node(a)
        v = b if isinstance(b, int) else self.add_node(b)
        if u not in self._nodes or v not in self._nodes:
            raise GraphError(f"edge endpoint missing: {u}, {v}")
        if u == v:
            raise GraphError(f"self-loop on {self.label(u)!r}")
        if multiplicity < 1:
            raise GraphError("multiplicity must be positive")
        relations = [relation] if isinstance(relation, str) else list(relation)
        relations = [r for r in relations if r]
        edge = self._adj[u].get(v)
        if edge is None:
            edge = Edge(min(u, v), max(u, v), [], 0, [])
            self._adj[u][v] = edge
            self._adj[v][u] = edge
        edge.absorb(relations, multiplicity, sources)
        return edge

    def edge(self, u: int, v: int) -> Edge | None:
        return self._adj.get(u, {}).get(v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, {})

    def edges(self) -> list[Edge]:
        return sorted(
            (e for u, nbrs in self._adj.items() for v, e in nbrs.items() if u < v),
            key=lambda e: (e.u, e.v),
        )

    def number_of_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def neighbors(self, node_id: int) -> list[int]:
        return sorted(self._adj[node_id])

    def degree(self, node_id: int) -> int:
        return len(self._adj[node_id])

    def degrees(self) -> dict[int, int]:
        return {n: len(nbrs) for n, nbrs in sorted(self._adj.items())}

    def adjacency(self) -> dict[int, set[int]]:
        return {n: set(nbrs) for n, nbrs in self._adj.items()}

    # ---------------------------------------------------------------- derived
    def copy(self) -> "KnowledgeGraph":
        return copy.deepcopy(self)

    def subgraph(self, node_ids: Iterable[int]) -> "KnowledgeGraph":
        """Induced subgraph keeping node ids, labels and edge data."""
        keep = set(node_ids)
        h = KnowledgeGraph(self.metadata)
        for n in sorted(keep):
            node = self.node(n)
            h.add_node(node.label, node_id=n)
            h._nodes[n].aliases = list(node.aliases)
        for e in self.edges():
            if e.u in keep and e.v in keep:
                h.add_edge(e.u, e.v, e.relations, e.multiplicity, e.sources)
        h._next_id = self._next_id
        return h

    def structure(self) -> tuple[frozenset, frozenset]:
        """Comparable snapshot of labels, adjacency, relation texts and multiplicities."""
        nodes = frozenset(self._by_label)
        edges = frozenset(
            (frozenset((self.label(e.u), self.label(e.v))), e.relation, e.multiplicity) for e in self.edges()
        )
        return nodes, edges

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        if {n.id: n.label for n in self._nodes.values()} != {n.id: n.label for n in other._nodes.values()}:
            return False
        mine = [(e.u, e.v, e.relation, e.multiplicity) for e in self.edges()]
        theirs = [(e.u, e.v, e.relation, e.multiplicity) for e in other.edges()]
        return mine == theirs

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"KnowledgeGraph(nodes={len(self)}, edges={self.number_of_edges()})"

    def check_invariants(self) -> None:
        """Assert the structural invariants; raises :class:`GraphError` on violation."""
        if set(self._by_label.values()) != set(self._nodes):
            raise GraphError("label index out of sync with node set")
        for n, nbrs in self._adj.items():
            if n in nbrs:
                raise GraphError(f"self-loop on node {n}")
            for m, e in nbrs.items():
                if m not in self._nodes or self._adj[m].get(n) is not e:
                    raise GraphError(f"asymmetric or dangling edge {n}-{m}")
        if sum(self.degrees().values()) != 2 * self.number_of_edges():
            raise GraphError("degree sum differs from twice the edge count")

    def to_networkx(self):
        """Export as a ``networkx.Graph`` keyed by node id."""
        import networkx as nx

        G = nx.Graph()
        for n in self.nodes():
            G.add_node(n, label=self.label(n))
        for e in self.edges():
            G.add_edge(e.u, e.v, relation=e.relation, multiplicity=e.multiplicity)
        return G


# ---------------------------------------------------------------------------
# operations


def build_from_triples(triples: Iterable[Triple]) -> KnowledgeGraph:
    """Build a graph with one node per label and one edge per label pair.

    Invalid triples (empty label, self-loop) are skipped and listed under
    ``metadata["rejected"]`` as ``(index, reason)`` pairs.
    """
    g = KnowledgeGraph()
    rejected: list[tuple[int, str]] = []
    accepted = 0
    for i, t in enumerate(triples):
        reason = t.problem()
        if reason:
            rejected.append((i, reason))
            continue
        t = Triple.of(t.subject, t.relation, t.object, t.source_chunk)
        g.add_edge(t.subject, t.object, t.relation, 1, [t.source_chunk] if t.source_chunk else [])
        accepted += 1
    g.metadata["triple_count"] = accepted
    if rejected:
        g.metadata["rejected"] = rejected
    return g


def compose(g1: KnowledgeGraph, g2: KnowledgeGraph) -> KnowledgeGraph:
    """Union by label; shared edges sum multiplicities and join relation texts."""
    out = g1.copy()
    for n in g2.nodes():
        node = g2.node(n)
        out.add_node(node.label)
        target = out.node(out.node_id(node.label))
        for alias in node.aliases:
            if alias not in target.aliases:
                target.aliases.append(alias)
    for e in g2.edges():
        out.add_edge(g2.label(e.u), g2.label(e.v), e.relations, e.multiplicity, e.sources)
    tc = g1.metadata.get("triple_count", 0) + g2.metadata.get("triple_count", 0)
    if tc:
        out.metadata["triple_count"] = tc
    return out


def merge_nodes(g: KnowledgeGraph, groups: Sequence[MergeGroup]) -> KnowledgeGraph:
    """Collapse each group onto its canonical node.

    Edges are rewired to the canonical node; edges that would become self-loops
    are dropped and parallel edges collapse with summed multiplicity. Merged
    labels are kept as aliases on the canonical node.
    """
    seen: set[int] = set()
    for grp in groups:
        missing = [m for m in grp.members if not g.has_node(m)]
        if missing:
            raise GraphError(f"merge group references unknown nodes {sorted(missing)}")
        if seen & grp.members:
            raise GraphError(f"merge groups overlap on nodes {sorted(seen & grp.members)}")
        seen |= grp.members

    out = g.copy()
    for grp in groups:
        c = grp.canonical
        canon = out.node(c)
        for m in sorted(grp.members - {c}):
            node = out.node(m)
            for alias in [node.label, *node.aliases]:
                if alias not in canon.aliases:
                    canon.aliases.append(alias)
            for nbr in out.neighbors(m):
                e = out.edge(m, nbr)
                if nbr != c:
                    out.add_edge(c, nbr, e.relations, e.multiplicity, e.sources)
            out.remove_nodes([m])
    return out


def connected_components(g: KnowledgeGraph) -> list[set[int]]:
    """Components ordered by their smallest node id."""
    seen: set[int] = set()
    comps = []
    for start in g.nodes():
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in g._adj[n]:
                if m not in comp:
                    comp.add(m)
                    queue.append(m)
        seen |= comp
        comps.append(comp)
    return comps


def prune_small_components(g: KnowledgeGraph, threshold: int = 10) -> KnowledgeGraph:
    """Drop every component with fewer than ``threshold`` nodes."""
    if threshold < 1:
        raise GraphError("threshold must be >= 1")
    out = g.copy()
    for comp in connected_components(g):
        if len(comp) < threshold:
            out.remove_nodes(comp)
    return out


def giant_component(g: KnowledgeGraph) -> KnowledgeGraph:
    """Induced subgraph on the largest component (ties: smallest minimum id)."""
    comps = connected_components(g)
    if not comps:
        raise GraphError("graph has no components")
    best = max(comps, key=lambda c: (len(c), -min(c)))
    return g.subgraph(best)


def iter_triples(g: KnowledgeGraph) -> Iterator[Triple]:
    """Yield one triple per relation text on each edge, ``multiplicity`` times in total."""
    for e in g.edges():
        rels = e.relations or [""]
        for i in range(e.multiplicity):
            yield Triple(g.label(e.u), rels[min(i, len(rels) - 1)], g.label(e.v))
