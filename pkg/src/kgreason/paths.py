"""Embedding-matched multi-path sampling between two concepts.

The top-``k`` node matches for each query term give ``k * k`` endpoint
pairs; each pair contributes one shortest path. Paths are rendered as
``label --> relation --> label`` strings and assembled into a prompt context.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .embedding import EmbeddingProvider, NodeEmbeddingIndex, NodeMatch, match_nodes
from .graph import GraphError, KnowledgeGraph

ARROW = " --> "
SIMILARITY_FLOOR = 0.3

CONTEXT_HEADER = (
    "You are given a set of information from a graph that describes the relationship between "
    "materials, structure, properties, and properties. You analyze these logically through reasoning."
)
DEFAULT_INSTRUCTION = (
    "### Carefully read the paths and summarize scientific insights in several bullet points. "
    "Then be creative and propose new research ideas. Think step by step."
)


class NoPathError(GraphError):
    pass


class NoMatchError(GraphError):
    pass


@dataclass(frozen=True)
class PathQuery:
    term_a: str
    term_b: str
    k: int = 2
    expansion_hops: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.expansion_hops not in (0, 1, 2):
            raise ValueError("expansion_hops must be 0, 1 or 2")


@dataclass
class ReasoningPath:
    nodes: list[int]
    labels: list[str]
    relations: list[str]
    rank: tuple[int, int] = (0, 0)
    scores: tuple[float, float] = (1.0, 1.0)
    duplicate_of: tuple[int, int] | None = None

    def __len__(self) -> int:
        """Number of hops."""
        return len(self.nodes) - 1


@dataclass
class PathBundle:
    query: PathQuery
    matches_a: list[NodeMatch]
    matches_b: list[NodeMatch]
    slots: dict[tuple[int, int], ReasoningPath | None]
    separate_view: KnowledgeGraph = field(default_factory=KnowledgeGraph)
    merged_view: KnowledgeGraph = field(default_factory=KnowledgeGraph)
    subgraph: KnowledgeGraph | None = None

    @property
    def paths(self) -> list[ReasoningPath]:
        return [p for _, p in sorted(self.slots.items()) if p is not None]

    @property
    def absent(self) -> list[tuple[int, int]]:
        return [slot for slot, p in sorted(self.slots.items()) if p is None]


def _bfs_distances(g: KnowledgeGraph, source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g._adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def shortest_path(g: KnowledgeGraph, source: int, target: int) -> ReasoningPath:
    """Minimum-hop path; among ties, the lexicographically smallest label sequence."""
    for n in (source, target):
        if not g.has_node(n):
            raise GraphError(f"unknown node id {n}")
    dist = _bfs_distances(g, target)
    if source not in dist:
        raise NoPathError(f"no path between {g.label(source)!r} and {g.label(target)!r}")
    nodes = [source]
    while nodes[-1] != target:
        v = nodes[-1]
        step = min((w for w in g._adj[v] if dist.get(w) == dist[v] - 1), key=g.label)
        nodes.append(step)
    return _make_path(g, nodes)


def _make_path(g: KnowledgeGraph, nodes: list[int], rank=(0, 0), scores=(1.0, 1.0)) -> ReasoningPath:
    rels = [g.edge(a, b).relation for a, b in zip(nodes, nodes[1:])]
    return ReasoningPath(list(nodes), [g.label(n) for n in nodes], rels, rank, scores)


def find_paths(g: KnowledgeGraph, index: NodeEmbeddingIndex, provider: EmbeddingProvider, query: PathQuery,
               floor: float = SIMILARITY_FLOOR) -> PathBundle:
    """Shortest paths for every pair among the top-``k`` matches of both terms.

    Only the best match of each term must clear ``floor``; lower-ranked matches
    fill the remaining slots regardless of score. Unreachable pairs keep their
    slot with ``None``.
    """
    if len(g) == 0:
        raise GraphError("cannot search paths in an empty graph")
    matches = []
    for term in (query.term_a, query.term_b):
        found = match_nodes(index, term, query.k, provider)
        if not found or found[0].score < floor:
            best = f" (best {found[0].label!r} at {found[0].score:.3f})" if found else ""
            raise NoMatchError(f"no node matches {term!r} above similarity {floor}{best}")
        matches.append(found)
    ma, mb = matches
    slots: dict[tuple[int, int], ReasoningPath | None] = {}
    seen: dict[tuple[int, ...], tuple[int, int]] = {}
    for i, a in enumerate(ma):
        for j, b in enumerate(mb):
            try:
                p = shortest_path(g, a.node, b.node)
            except NoPathError:
                slots[(i, j)] = None
                continue
            p.rank, p.scores = (i, j), (a.score, b.score)
            key = tuple(p.nodes)
            if key in seen:
                p.duplicate_of = seen[key]
            else:
                seen[key] = (i, j)
            slots[(i, j)] = p
    bundle = PathBundle(query, ma, mb, slots)
    present = bundle.paths
    if present:
        bundle.separate_view, bundle.merged_view = merge_paths(present)
        bundle.subgraph = expand_subgraph(g, present, query.expansion_hops)
    return bundle


def expand_subgraph(g: KnowledgeGraph, paths: list[ReasoningPath], hops: int = 1) -> KnowledgeGraph:
    """Induced subgraph on path nodes plus everything within ``hops`` of them."""
    if hops not in (0, 1, 2):
        raise ValueError("hops must be 0, 1 or 2")
    keep = {n for p in paths for n in p.nodes}
    frontier = set(keep)
    for _ in range(hops):
        frontier = {w for v in frontier for w in g._adj[v]} - keep
        keep |= frontier
    return g.subgraph(keep)


def merge_paths(paths: list[ReasoningPath]) -> tuple[KnowledgeGraph, KnowledgeGraph]:
    """Separate view (per-path node copies) and merged view (shared labels collapse)."""
    if not paths:
        raise ValueError("need at least one path")
    separate, merged = KnowledgeGraph(), KnowledgeGraph()
    for p in paths:
        tag = f" [{p.rank[0]},{p.rank[1]}]"
        copies = [separate.add_node(lab + tag) for lab in p.labels]
        for lab in p.labels:
            merged.add_node(lab)
        for (a, b), (ca, cb), rel in zip(zip(p.labels, p.labels[1:]), zip(copies, copies[1:]), p.relations):
            separate.add_edge(ca, cb, rel)
            u, v = merged.node_id(a), merged.node_id(b)
            if not merged.has_edge(u, v):
                merged.add_edge(u, v, rel)
    return separate, merged


def serialize_path(path: ReasoningPath) -> str:
    parts = [path.labels[0]]
    for rel, lab in zip(path.relations, path.labels[1:]):
        parts += [rel, lab]
    return ARROW.join(parts)


def parse_path(text: str) -> tuple[list[str], list[str]]:
    """Split a serialized path back into ``(labels, relations)``."""
    parts = text.split(ARROW)
    if len(parts) % 2 == 0:
        raise ValueError("serialized path must alternate label and relation")
    return parts[0::2], parts[1::2]


@dataclass
class ContextDocument:
    primary: str
    primary_rank: tuple[int, int]
    alternatives: list[tuple[tuple[int, int], str]]
    instruction: str
    term_a: str
    term_b: str
    header: str = CONTEXT_HEADER

    def render(self) -> str:
        i, j = self.primary_rank
        blocks = [
            self.header,
            f"### Primary combination (path from {i} to {j}):",
            self.primary,
            f"This represents the main combination of nodes in the knowledge graph between {self.term_a} and {self.term_b}.",
        ]
        if self.alternatives:
            blocks.append(
                "The following represent another possible combination of paths, "
                "providing different insights or complementing the primary path."
            )
            for (a, b), text in self.alternatives:
                blocks += [f"### Alternative combination (path from {a} to {b}):", text]
        blocks.append(self.instruction)
        return "\n\n".join(blocks) + "\n"


def assemble_context(bundle: PathBundle, instruction: str = DEFAULT_INSTRUCTION) -> ContextDocument:
    paths = bundle.paths
    if not paths:
        raise ValueError("path bundle is empty")
    ordered = sorted(paths, key=lambda p: (p.rank != (0, 0), sum(p.rank), p.rank[0]))
    primary, rest = ordered[0], sorted(ordered[1:], key=lambda p: p.rank)
    return ContextDocument(
        primary=serialize_path(primary),
        primary_rank=primary.rank,
        alternatives=[(p.rank, serialize_path(p)) for p in rest],
        instruction=instruction,
        term_a=bundle.query.term_a,
        term_b=bundle.query.term_b,
    )
