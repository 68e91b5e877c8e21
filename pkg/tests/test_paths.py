from __future__ import annotations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bfs_oracle, from_nx, random_connected
from kgreason.embedding import HashEmbedder, embed_nodes
from kgreason.graph import KnowledgeGraph
from kgreason.paths import (
    CONTEXT_HEADER,
    DEFAULT_INSTRUCTION,
    NoMatchError,
    NoPathError,
    PathBundle,
    PathQuery,
    ReasoningPath,
    assemble_context,
    expand_subgraph,
    find_paths,
    merge_paths,
    parse_path,
    serialize_path,
    shortest_path,
)

GRAPHENE_SILK = (
    "graphene --> improves --> strength --> is exhibited due to hierarchical microstructures that allow for "
    "damage tolerance at multiple length scales --> biological materials --> provide functionalities --> silk"
)


def _walk_ok(g: KnowledgeGraph, p: ReasoningPath) -> bool:
    simple = len(set(p.nodes)) == len(p.nodes)
    return simple and all(g.has_edge(a, b) for a, b in zip(p.nodes, p.nodes[1:]))


def _graphene_graph() -> KnowledgeGraph:
    labels, rels = parse_path(GRAPHENE_SILK)
    g = KnowledgeGraph()
    for a, r, b in zip(labels, rels, labels[1:]):
        g.add_edge(a, b, r)
    g.add_edge("silk", "spider", "produced by")
    g.add_edge("graphene", "carbon", "made of")
    return g


def test_serialize_reference_path():
    g = _graphene_graph()
    e = HashEmbedder(dimension=128)
    bundle = find_paths(g, embed_nodes(g, e), e, PathQuery("graphene", "silk", k=1))
    assert [serialize_path(p) for p in bundle.paths] == [GRAPHENE_SILK]


def test_serialize_small_cases():
    assert serialize_path(ReasoningPath([0], ["silk"], [])) == "silk"
    assert serialize_path(ReasoningPath([0, 1], ["a", "b"], ["is"])) == "a --> is --> b"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text("abcdefgh xyz", min_size=1, max_size=8).map(str.strip).filter(bool), min_size=1, max_size=6))
def test_parse_inverts_serialize(parts):
    labels = parts
    rels = [f"rel {i}" for i in range(len(labels) - 1)]
    text = serialize_path(ReasoningPath(list(range(len(labels))), labels, rels))
    assert parse_path(text) == (labels, rels)


def test_shortest_path_basics():
    g = from_nx(nx.path_graph(5))
    assert shortest_path(g, 0, 4).nodes == [0, 1, 2, 3, 4]
    assert shortest_path(g, 2, 2).nodes == [2] and len(shortest_path(g, 2, 2)) == 0
    h = from_nx(nx.disjoint_union(nx.path_graph(2), nx.path_graph(2)))
    with pytest.raises(NoPathError):
        shortest_path(h, 0, 3)


def test_shortest_path_lexicographic_tie_break():
    g = KnowledgeGraph()
    for a, b in [("s", "zeta"), ("zeta", "t"), ("s", "alpha"), ("alpha", "t")]:
        g.add_edge(a, b, "r")
    p = shortest_path(g, g.node_id("s"), g.node_id("t"))
    assert p.labels == ["s", "alpha", "t"]


def test_shortest_path_matches_bfs_oracle():
    rng = np.random.default_rng(21)
    for _ in range(5):
        G = random_connected(rng, int(rng.integers(10, 50)), 0.05)
        g = from_nx(G)
        adj = {v: set(G[v]) for v in G}
        for s in G:
            dist = bfs_oracle(adj, s)
            for t in G:
                p = shortest_path(g, s, t)
                assert len(p) == dist[t]
                assert _walk_ok(g, p)


def test_transitivity_witness():
    g = KnowledgeGraph()
    g.add_edge("a", "b", "r")
    g.add_edge("b", "c", "s")
    assert len(shortest_path(g, g.node_id("a"), g.node_id("c"))) <= 2


def test_find_paths_four_slots_and_exhaustive_oracle():
    rng = np.random.default_rng(5)
    G = random_connected(rng, 25, 0.08)
    g = from_nx(G)
    e = HashEmbedder(dimension=64)
    bundle = find_paths(g, embed_nodes(g, e), e, PathQuery("n3", "n17", k=2))
    assert sorted(bundle.slots) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(bundle.paths) == 4 and bundle.absent == []
    assert bundle.paths[0].labels[0] == "n3" and bundle.paths[0].labels[-1] == "n17"
    for p in bundle.paths:
        s, t = p.nodes[0], p.nodes[-1]
        best = min(len(q) - 1 for q in nx.all_simple_paths(G, s, t, cutoff=len(p))) if s != t else 0
        assert len(p) == best
        assert _walk_ok(g, p)


def test_find_paths_same_term_gives_single_node_path():
    g = from_nx(nx.path_graph(4))
    e = HashEmbedder(dimension=64)
    bundle = find_paths(g, embed_nodes(g, e), e, PathQuery("n2", "n2", k=1))
    assert bundle.paths[0].labels == ["n2"]


def test_find_paths_unreachable_slot_recorded():
    G = nx.disjoint_union(nx.path_graph(3), nx.path_graph(3))
    g = from_nx(G)
    e = HashEmbedder(dimension=64)
    e.inject("n4", e.embed_batch(["n0"])[0] * 0.9 + e.embed_batch(["other"])[0] * 0.1)
    bundle = find_paths(g, embed_nodes(g, e), e, PathQuery("n0", "n2", k=2))
    assert len(bundle.slots) == 4
    assert bundle.absent and all(bundle.slots[s] is None for s in bundle.absent)


def test_find_paths_floor_error_names_term():
    g = from_nx(nx.path_graph(3))
    e = HashEmbedder(dimension=256)
    with pytest.raises(NoMatchError, match="quantum chromodynamics"):
        find_paths(g, embed_nodes(g, e), e, PathQuery("quantum chromodynamics", "n1"))


def test_duplicate_paths_marked():
    g = from_nx(nx.path_graph(2))
    e = HashEmbedder(dimension=32)
    bundle = find_paths(g, embed_nodes(g, e), e, PathQuery("n0", "n1", k=2))
    dups = [p for p in bundle.paths if p.duplicate_of is not None]
    assert all(bundle.slots[p.duplicate_of].nodes == p.nodes for p in dups)


def test_expand_subgraph_levels():
    G = nx.star_graph(5)
    nx.add_path(G, [5, 6, 7])
    g = from_nx(G)
    p = shortest_path(g, 0, 1)
    assert set(expand_subgraph(g, [p], 0).nodes()) == {0, 1}
    one = set(expand_subgraph(g, [p], 1).nodes())
    assert one == {0, 1, 2, 3, 4, 5}
    two = set(expand_subgraph(g, [p], 2).nodes())
    frontier = {w for v in one for w in G[v]} | one
    assert two == frontier


def test_query_validation():
    with pytest.raises(ValueError):
        PathQuery("a", "b", k=0)
    with pytest.raises(ValueError):
        PathQuery("a", "b", expansion_hops=3)


def _path(labels, rank):
    return ReasoningPath(list(range(len(labels))), labels, [f"r{i}" for i in range(len(labels) - 1)], rank)


def test_merge_paths_views():
    p1 = _path(["a", "mechanical properties", "b"], (0, 0))
    p2 = _path(["c", "mechanical properties", "d"], (0, 1))
    sep, merged = merge_paths([p1, p2])
    assert len(sep) == 6 and len(merged) == 5
    hub = merged.node_id("mechanical properties")
    assert merged.degree(hub) == 4 == max(merged.degrees().values())
    sep1, merged1 = merge_paths([p1])
    assert len(sep1) == len(merged1) == 3
    sep2, merged2 = merge_paths([p1, _path(["x", "y"], (1, 1))])
    assert len(merged2) == 5 and merged2.number_of_edges() == 3


def _bundle(slots) -> PathBundle:
    return PathBundle(PathQuery("a flower", "nacre-inspired cement"), [], [], slots)


def test_context_skeleton_four_paths():
    slots = {(i, j): _path(["p", f"q{i}{j}", "r"], (i, j)) for i in (0, 1) for j in (0, 1)}
    text = assemble_context(_bundle(slots)).render()
    body = {rank: serialize_path(p) for rank, p in slots.items()}
    expected = (
        CONTEXT_HEADER + "\n\n"
        "### Primary combination (path from 0 to 0):\n\n" + body[(0, 0)] + "\n\n"
        "This represents the main combination of nodes in the knowledge graph between a flower and "
        "nacre-inspired cement.\n\n"
        "The following represent another possible combination of paths, providing different insights or "
        "complementing the primary path.\n\n"
        "### Alternative combination (path from 0 to 1):\n\n" + body[(0, 1)] + "\n\n"
        "### Alternative combination (path from 1 to 0):\n\n" + body[(1, 0)] + "\n\n"
        "### Alternative combination (path from 1 to 1):\n\n" + body[(1, 1)] + "\n\n"
        + DEFAULT_INSTRUCTION + "\n"
    )
    assert text == expected


def test_context_single_path_and_promotion():
    one = assemble_context(_bundle({(0, 0): _path(["p", "q"], (0, 0))})).render()
    assert "Alternative" not in one and one.rstrip("\n").endswith(DEFAULT_INSTRUCTION)
    doc = assemble_context(_bundle({(0, 0): None, (1, 1): _path(["p", "q"], (1, 1)), (0, 1): _path(["p", "z"], (0, 1))}))
    assert doc.primary_rank == (0, 1)
    custom = assemble_context(_bundle({(0, 0): _path(["p", "q"], (0, 0))}), "Answer briefly.").render()
    assert custom.endswith("\n\nAnswer briefly.\n")
    with pytest.raises(ValueError):
        assemble_context(_bundle({(0, 0): None}))
