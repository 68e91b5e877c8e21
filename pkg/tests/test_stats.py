from __future__ import annotations

import math
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import barbell, betweenness_oracle, from_nx, random_connected, sample_discrete_power_law, two_triangles
from kgreason.embedding import HashEmbedder, embed_nodes
from kgreason.graph import GraphError, KnowledgeGraph
from kgreason.stats import (
    FitError,
    avg_clustering,
    betweenness_centrality,
    bridging_centrality,
    bridging_coefficient,
    ccdf_table,
    cluster_report,
    clustering_coefficient,
    community_report,
    degree_histogram_log1p,
    degree_stats,
    detect_communities,
    fit_power_law,
    modularity,
    stats_from_counts,
)


def _ids(g, labels):
    return {g.node_id(x) for x in labels}


# --- degree --------------------------------------------------------------


@pytest.mark.parametrize("n, e, avg, dens", [(12319, 15752, 2.56, 0.00021), (11878, 15396, 2.59, 0.00022)])
def test_degree_formulas_reference_table(n, e, avg, dens):
    a, d = stats_from_counts(n, e)
    assert round(a, 2) == avg
    assert float(f"{d:.2g}") == dens


def test_degree_stats_small_graph():
    g = two_triangles()
    s = degree_stats(g)
    assert (s.node_count, s.edge_count) == (6, 7)
    assert s.avg_degree == pytest.approx(14 / 6)
    assert s.density == pytest.approx(7 / 15)
    assert (s.max_degree, s.min_degree, s.median_degree) == (3, 2, 2)


def test_degree_stats_triangle():
    s = degree_stats(from_nx(nx.complete_graph(3)))
    assert (s.avg_degree, s.max_degree, s.min_degree, s.median_degree, s.density) == (2, 2, 2, 2, 1.0)


def test_median_is_lower_middle():
    s = degree_stats(from_nx(nx.path_graph(4)))  # degrees 1, 1, 2, 2
    assert s.median_degree == 1


def test_histogram_star_and_uniform():
    counts, _ = degree_histogram_log1p(from_nx(nx.star_graph(5)), bins=10)
    assert list(counts[counts > 0]) == [5, 1]
    counts, _ = degree_histogram_log1p(from_nx(nx.cycle_graph(6)), bins=4)
    assert (counts > 0).sum() == 1 and counts.sum() == 6


def test_histogram_matches_direct_binning():
    G = nx.gnp_random_graph(100, 0.05, seed=11)
    G.remove_nodes_from([v for v in list(G) if G.degree(v) == 0])
    g = from_nx(nx.convert_node_labels_to_integers(G))
    counts, edges = degree_histogram_log1p(g, bins=7)
    oracle = [0] * 7
    for d in g.degrees().values():
        x = math.log1p(d)
        i = 6 if x >= edges[-1] else max(j for j in range(7) if edges[j] <= x)
        oracle[i] += 1
    assert list(counts) == oracle


def test_degree_histogram_log1p_counts_all_nodes():
    g = from_nx(nx.star_graph(9))
    counts, edges = degree_histogram_log1p(g, bins=5)
    assert counts.sum() == 10
    assert edges[0] == pytest.approx(math.log1p(1)) and edges[-1] == pytest.approx(math.log1p(9))


# --- clustering and centrality -------------------------------------------


def test_clustering_matches_networkx():
    G = nx.karate_club_graph()
    g = from_nx(G)
    for v in G:
        assert clustering_coefficient(g, v) == pytest.approx(nx.clustering(G, v), abs=1e-12)
    assert avg_clustering(g) == pytest.approx(nx.average_clustering(G), abs=1e-12)


def test_clustering_triangle_enumeration_oracle():
    G = nx.gnp_random_graph(20, 0.3, seed=5)
    g = from_nx(G)
    total = 0.0
    for v in G:
        nb = sorted(G[v])
        k = len(nb)
        tri = sum(1 for i in range(k) for j in range(i + 1, k) if G.has_edge(nb[i], nb[j]))
        total += tri / (k * (k - 1) / 2) if k >= 2 else 0.0
    assert avg_clustering(g) == pytest.approx(total / 20, abs=1e-12)
    assert clustering_coefficient(from_nx(nx.star_graph(4)), 0) == 0.0


def test_betweenness_path_and_complete():
    bc = betweenness_centrality(from_nx(nx.path_graph(3)))
    assert bc == {0: 0.0, 1: 1.0, 2: 0.0}
    assert set(betweenness_centrality(from_nx(nx.complete_graph(6))).values()) == {0.0}


def test_bridging_star_and_complete():
    br = bridging_centrality(from_nx(nx.star_graph(5)))
    assert br[0] == pytest.approx(0.04)
    assert all(br[v] == 0 for v in range(1, 6))
    assert set(bridging_centrality(from_nx(nx.complete_graph(5))).values()) == {0.0}


def test_betweenness_two_triangles_frozen():
    g = two_triangles()
    bc = betweenness_centrality(g)
    assert bc[g.node_id("c")] == pytest.approx(0.6, abs=1e-12)
    assert bc[g.node_id("d")] == pytest.approx(0.6, abs=1e-12)
    assert bc[g.node_id("a")] == 0.0


def test_betweenness_matches_enumeration_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        G = random_connected(rng, int(rng.integers(3, 20)), 0.15)
        bc = betweenness_centrality(from_nx(G))
        oracle = betweenness_oracle(G)
        for v in G:
            assert bc[v] == pytest.approx(oracle[v], abs=1e-9)


def test_betweenness_disconnected_graph():
    G = nx.disjoint_union(nx.path_graph(3), nx.path_graph(3))
    bc = betweenness_centrality(from_nx(G))
    oracle = betweenness_oracle(G)
    assert all(bc[v] == pytest.approx(oracle[v], abs=1e-12) for v in G)


def test_bridging_coefficient_and_barbell():
    g, mid = barbell()
    # middle node: degree 2, both neighbours degree 3
    assert bridging_coefficient(g, mid) == pytest.approx((1 / 2) / (2 / 3))
    br = bridging_centrality(g)
    assert max(br, key=br.get) == mid


# --- communities ---------------------------------------------------------


def test_modularity_two_triangles_exact():
    g = two_triangles()
    q = modularity(g, [_ids(g, "abc"), _ids(g, "def")])
    assert abs(q - 5 / 14) < 1e-12


def test_modularity_rejects_bad_partitions():
    g = two_triangles()
    with pytest.raises(GraphError):
        modularity(g, [_ids(g, "abc")])
    with pytest.raises(GraphError):
        modularity(g, [_ids(g, "abcd"), _ids(g, "def")])


@pytest.mark.parametrize("method", ["greedy_modularity", "girvan_newman"])
def test_detect_recovers_triangles(method):
    g = two_triangles()
    part = detect_communities(g, method)
    assert {frozenset(c) for c in part.communities} == {frozenset(_ids(g, "abc")), frozenset(_ids(g, "def"))}
    assert part.modularity == pytest.approx(5 / 14, abs=1e-12)


def test_triangle_split_is_best_two_partition():
    g = two_triangles()
    nodes = g.nodes()
    best = max(
        (modularity(g, [set(c), set(nodes) - set(c)]), frozenset(c))
        for r in range(1, len(nodes))
        for c in combinations(nodes, r)
    )
    assert best[1] in (frozenset(_ids(g, "abc")), frozenset(_ids(g, "def")))


@pytest.mark.parametrize("method", ["greedy_modularity", "girvan_newman"])
def test_no_community_spans_components(method):
    G = nx.disjoint_union(nx.complete_graph(4), nx.cycle_graph(5))
    g = from_nx(G)
    comps = [set(c) for c in nx.connected_components(G)]
    for c in detect_communities(g, method).communities:
        assert any(set(c) <= comp for comp in comps)


def test_girvan_newman_size_limit():
    g = from_nx(nx.path_graph(2001))
    with pytest.raises(GraphError, match="greedy_modularity"):
        detect_communities(g, "girvan_newman")


def test_detect_unknown_method():
    with pytest.raises(ValueError):
        detect_communities(two_triangles(), "louvain-ish")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 30))
def test_modularity_agrees_with_networkx(seed, n):
    rng = np.random.default_rng(seed)
    G = random_connected(rng, n, 0.1)
    g = from_nx(G)
    part = detect_communities(g)
    assert -0.5 <= part.modularity <= 1.0
    assert part.modularity == pytest.approx(nx.community.modularity(G, part.communities), abs=1e-12)
    covered = sorted(v for c in part.communities for v in c)
    assert covered == sorted(G)


def test_community_report_totals():
    g = two_triangles()
    part = detect_communities(g)
    rep = community_report(g, part)
    assert rep.intra_edges == 6 and rep.inter_edges == 1
    assert rep.avg_inter_community_edges == pytest.approx(1.0)
    assert rep.avg_intra_community_edges == pytest.approx(3.0)
    assert [c.size for c in rep.communities] == [3, 3]


# --- power law -----------------------------------------------------------


def test_power_law_recovers_alpha():
    x = sample_discrete_power_law(2.5, 10_000, seed=1)
    fit = fit_power_law(x)
    assert abs(fit.alpha - 2.5) <= max(0.1, 3 * fit.sigma_alpha)
    assert fit.loglik_ratio_R > 0
    assert isinstance(fit.sigma_alpha, float)


def test_power_law_fixed_xmin_frozen():
    x = sample_discrete_power_law(2.5, 10_000, seed=1)
    fit = fit_power_law(x, x_min=1)
    assert fit.x_min == 1 and fit.n_tail == 10_000
    assert fit.sigma_alpha == pytest.approx((fit.alpha - 1) / 100)
    assert abs(fit.alpha - 2.5) < 0.05


def test_power_law_geometric_prefers_exponential():
    rng = np.random.default_rng(3)
    fit = fit_power_law(rng.geometric(0.1, 10_000))
    assert fit.loglik_ratio_R < 0


def test_power_law_p_value_matches_reference_pair():
    # two-sided normal p-value of a normalized ratio of 4.1526
    assert math.erfc(4.1526 / math.sqrt(2)) == pytest.approx(3.29e-5, rel=0.01)


def test_power_law_rejects_small_or_degenerate_samples():
    with pytest.raises(FitError):
        fit_power_law([1, 2, 3])
    with pytest.raises(FitError):
        fit_power_law([3] * 100)


def test_ccdf_table_shape():
    x = sample_discrete_power_law(2.5, 2_000, seed=2)
    fit = fit_power_law(x)
    rows = ccdf_table(x, fit)
    assert rows[0][1] == pytest.approx(1.0)
    emp = [r[1] for r in rows]
    assert all(a >= b for a, b in zip(emp, emp[1:]))


# --- embedding clusters --------------------------------------------------


def test_cluster_report_is_deterministic():
    g = from_nx(nx.path_graph(30))
    idx = embed_nodes(g, HashEmbedder(dimension=64))
    a = cluster_report(idx, n_clusters=3)
    b = cluster_report(idx, n_clusters=3)
    assert a.nearest_labels == b.nearest_labels
    assert sorted(v for m in a.members for v in m) == g.nodes()
    with pytest.raises(ValueError):
        cluster_report(idx, n_clusters=31)


def test_empty_graph_stats_raise():
    with pytest.raises(GraphError):
        degree_stats(KnowledgeGraph())
    with pytest.raises(GraphError):
        degree_histogram_log1p(KnowledgeGraph())
