"""Acceptance criteria, each checked at its stated tolerance and runtime limit.

Every test prints one ``PASS``/``FAIL`` line with its measured time; the
lines are repeated in an "acceptance criteria" section of the pytest summary.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from conftest import (
    barbell,
    betweenness_oracle,
    bfs_oracle,
    from_nx,
    random_connected,
    sample_discrete_power_law,
    two_triangles,
)
from kgreason.cli import main
from kgreason.embedding import HashEmbedder, embed_nodes, similarity_merge_groups
from kgreason.extraction import DocumentChunk, distill_chunk, extract_triples
from kgreason.formats import graphml_string, import_graphml, parse_graphml
from kgreason.graph import KnowledgeGraph, MergeGroup, merge_nodes
from kgreason.isomorphism import IsoConstraints, find_isomorphic_subgraphs, verify_mapping
from kgreason.llm import ScriptedChat
from kgreason.paths import PathBundle, PathQuery, ReasoningPath, assemble_context, find_paths, shortest_path
from kgreason.stats import (
    betweenness_centrality,
    bridging_centrality,
    degree_stats,
    detect_communities,
    fit_power_law,
    modularity,
)

# optional: the published global graph, used for the reference fit when present
GLOBAL_GRAPH = Path(os.environ.get("KGREASON_GLOBAL_GRAPH", Path(__file__).parent / "data" / "global_graph.graphml"))


def _graph_with_counts(n: int, e: int, seed: int) -> KnowledgeGraph:
    """Connected-ish synthetic graph with exactly ``n`` nodes and ``e`` edges."""
    rng = np.random.default_rng(seed)
    g = KnowledgeGraph()
    for i in range(n):
        g.add_node(f"concept {i}")
    parents = rng.integers(0, np.arange(1, n))
    for i in range(1, n):
        g.add_edge(int(parents[i - 1]), i, "relates to")
    while g.number_of_edges() < e:
        u, v = (int(x) for x in rng.integers(0, n, 2))
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v, "relates to")
    return g


def test_degree_formula_fidelity(criterion):
    criterion.start("degree-formula fidelity", 1.0)
    cases = [(12319, 15752, 2.56, 0.00021), (11878, 15396, 2.59, 0.00022)]
    graphs = [_graph_with_counts(n, e, seed=i) for i, (n, e, _, _) in enumerate(cases)]
    with criterion.measure():
        stats = [degree_stats(g) for g in graphs]
    for s, (n, e, avg, dens) in zip(stats, cases):
        assert (s.node_count, s.edge_count) == (n, e)
        assert round(s.avg_degree, 2) == avg
        assert float(f"{s.density:.2g}") == dens
    assert criterion.within_limit()


def test_power_law_estimator(criterion):
    criterion.start("power-law estimator", 30.0)
    with criterion.measure():
        x = sample_discrete_power_law(2.5, 10_000, seed=1)
        fit = fit_power_law(x)
        geo = fit_power_law(np.random.default_rng(3).geometric(0.1, 10_000))
    assert abs(fit.alpha - 2.5) <= 0.1
    assert fit.loglik_ratio_R > 0
    assert geo.loglik_ratio_R < 0
    assert criterion.within_limit()


@pytest.mark.skipif(not GLOBAL_GRAPH.exists(), reason="published global graph file not present")
def test_power_law_reference_graph(criterion):
    criterion.start("power-law reference graph", 30.0)
    g = import_graphml(GLOBAL_GRAPH)
    with criterion.measure():
        fit = fit_power_law([d for d in g.degrees().values() if d > 0])
    assert abs(fit.alpha - 2.8786) <= 0.05
    assert fit.loglik_ratio_R > 0 and fit.p_value < 1e-3
    assert criterion.within_limit()


def test_modularity_exactness(criterion):
    criterion.start("modularity exactness", 1.0)
    g = two_triangles()
    truth = {frozenset(g.node_id(x) for x in "abc"), frozenset(g.node_id(x) for x in "def")}
    with criterion.measure():
        q = modularity(g, [set(c) for c in truth])
        parts = [detect_communities(g, m) for m in ("greedy_modularity", "girvan_newman")]
    assert abs(q - 5 / 14) < 1e-12
    for part in parts:
        assert {frozenset(c) for c in part.communities} == truth
    assert criterion.within_limit()


def test_centrality_oracles(criterion):
    criterion.start("centrality oracles", 30.0)
    rng = np.random.default_rng(2024)
    graphs = [random_connected(rng, int(rng.integers(3, 31)), float(rng.uniform(0.05, 0.3))) for _ in range(25)]
    with criterion.measure():
        for G in graphs:
            bc = betweenness_centrality(from_nx(G))
            oracle = betweenness_oracle(G)
            assert all(abs(bc[v] - oracle[v]) <= 1e-9 for v in G)
        g, mid = barbell()
        br = bridging_centrality(g)
    assert max(br, key=br.get) == mid
    assert all(br[mid] > br[v] for v in g.nodes() if v != mid)
    assert criterion.within_limit()


def test_path_oracle(criterion):
    criterion.start("path oracle", 30.0)
    rng = np.random.default_rng(77)
    graphs = [random_connected(rng, int(rng.integers(2, 51)), float(rng.uniform(0.02, 0.15))) for _ in range(25)]
    with criterion.measure():
        for G in graphs:
            g = from_nx(G)
            adj = {v: set(G[v]) for v in G}
            for s in G:
                dist = bfs_oracle(adj, s)
                for t in G:
                    assert len(shortest_path(g, s, t)) == dist[t]
        G = graphs[-1] if graphs[-1].number_of_nodes() >= 4 else random_connected(rng, 20, 0.1)
        g = from_nx(G)
        e = HashEmbedder(dimension=64)
        bundle = find_paths(g, embed_nodes(g, e), e, PathQuery("n0", "n3", k=2))
    assert sorted(bundle.slots) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(bundle.slots[s] is not None for s in bundle.slots)
    assert criterion.within_limit()


def test_merge_semantics(criterion):
    criterion.start("merge semantics", 10.0)
    e = HashEmbedder(dimension=1024)
    dup = KnowledgeGraph()
    pairs = [(f"mechanical property {i}", f"Mechanical_Property-{i}") for i in range(20)]
    for a, b in pairs:
        dup.add_node(a)
        dup.add_node(b)
    distinct = KnowledgeGraph()
    for i in range(500):
        distinct.add_node(f"distinct material concept {i}")
    rng = np.random.default_rng(9)
    G = random_connected(rng, 60, 0.08)
    g = from_nx(G)
    with criterion.measure():
        groups = similarity_merge_groups(embed_nodes(dup, e), dup, 0.95)
        none = similarity_merge_groups(embed_nodes(distinct, e), distinct, 0.95)
        merge = [MergeGroup.choose(g, [0, 1, 2]), MergeGroup.choose(g, [10, 20])]
        h = merge_nodes(g, merge)
    assert sorted(sorted(dup.label(v) for v in grp.members) for grp in groups) == sorted(
        sorted(dup.label(dup.node_id(x)) for x in p) for p in pairs)
    assert none == []
    assert sum(h.degrees().values()) == 2 * h.number_of_edges()
    assert sum(ed.multiplicity for ed in h.edges()) <= sum(ed.multiplicity for ed in g.edges())
    h.check_invariants()
    assert criterion.within_limit()


def test_isomorphism_recovery(criterion):
    criterion.start("isomorphism recovery", 60.0)
    rng = np.random.default_rng(31)
    cases = []
    for i in range(20):
        G = random_connected(rng, int(rng.integers(15, 26)), 0.2)
        perm = rng.permutation(G.number_of_nodes())
        H = nx.relabel_nodes(G, {v: int(perm[v]) for v in G})
        cases.append((from_nx(G, "g"), from_nx(H, "h")))
    tri, path = from_nx(nx.complete_graph(3)), from_nx(nx.path_graph(3))
    with criterion.measure():
        found = [find_isomorphic_subgraphs(a, b)[0] for a, b in cases]
        none, _ = find_isomorphic_subgraphs(tri, path, IsoConstraints(min_nodes=3, min_avg_degree=0.0))
    for (a, b), maps in zip(cases, found):
        assert maps and all(verify_mapping(a, b, m) for m in maps)
        assert any(len(m.node_pairs) == len(a) for m in maps)
    assert none == []
    assert criterion.within_limit()


def test_pipeline_determinism(criterion, tmp_path, corpus_dir, script_file, capsys):
    criterion.start("pipeline determinism", 10.0)
    outputs = []
    with criterion.measure():
        for name in ("first", "second"):
            run = tmp_path / name
            code = main(["ingest", str(corpus_dir), "--script", str(script_file), "--run-dir", str(run), "--json"])
            assert code == 0, capsys.readouterr().err
            outputs.append((run / "graphs" / "graph.graphml").read_bytes())
        g = import_graphml(tmp_path / "first" / "graphs" / "graph.graphml")
        again = parse_graphml(graphml_string(g))
    capsys.readouterr()
    assert outputs[0] == outputs[1]
    assert again == g and again.structure() == g.structure()
    assert graphml_string(g).encode("utf-8") == outputs[0]
    assert len(g) > 0
    assert criterion.within_limit()


def test_prompt_fidelity(criterion):
    criterion.start("prompt fidelity", 1.0)
    chunk = DocumentChunk("doc-0000", "Nacre combines aragonite platelets with a protein matrix.", 8)
    records = json.dumps([{"node_1": "nacre", "node_2": "aragonite platelets", "edge": "contains"}])
    chat = ScriptedChat(["summary", "- bullet", "title", records, records, records])
    with criterion.measure():
        ctx = distill_chunk(chunk, chat)
        res = extract_triples(ctx, chat)
    sent = ["\n".join(m.content for m in r.messages) for r in chat.requests]
    assert "concise scientific summary" in sent[0] and chunk.text in sent[0]
    assert "network ontology graph maker" in sent[3]
    assert "Improve the ontology by renaming" in sent[4]
    assert res.status == "ok" and len(chat.requests) == 6
    assert criterion.within_limit()


def test_context_format(criterion):
    criterion.start("context format", 1.0)

    def path(labels, rank):
        return ReasoningPath(list(range(len(labels))), labels, ["rel"] * (len(labels) - 1), rank)

    slots = {(i, j): path(["x", f"mid {i}{j}", "y"], (i, j)) for i in (0, 1) for j in (0, 1)}
    bundle = PathBundle(PathQuery("term a", "term b"), [], [], slots)
    with criterion.measure():
        text = assemble_context(bundle).render()
    skeleton = text
    for p in slots.values():
        skeleton = skeleton.replace(" --> ".join([p.labels[0], "rel", p.labels[1], "rel", p.labels[2]]), "<PATH>", 1)
    expected = (
        "You are given a set of information from a graph that describes the relationship between materials, "
        "structure, properties, and properties. You analyze these logically through reasoning.\n\n"
        "### Primary combination (path from 0 to 0):\n\n<PATH>\n\n"
        "This represents the main combination of nodes in the knowledge graph between term a and term b.\n\n"
        "The following represent another possible combination of paths, providing different insights or "
        "complementing the primary path.\n\n"
        "### Alternative combination (path from 0 to 1):\n\n<PATH>\n\n"
        "### Alternative combination (path from 1 to 0):\n\n<PATH>\n\n"
        "### Alternative combination (path from 1 to 1):\n\n<PATH>\n\n"
        "### Carefully read the paths and summarize scientific insights in several bullet points. Then be "
        "creative and propose new research ideas. Think step by step.\n"
    )
    assert skeleton == expected
    assert criterion.within_limit()
