from __future__ import annotations

import json
import time
from contextlib import contextmanager
from itertools import combinations
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from scipy.special import zeta

from kgreason.graph import KnowledgeGraph

DATA = Path(__file__).parent / "data"
# Raw extraction output for a biofabrication chunk, single quotes included.
BIOFAB_OUTPUT = (DATA / "biofab_output.txt").read_text(encoding="utf-8")


def from_nx(G: nx.Graph, prefix: str = "n") -> KnowledgeGraph:
    """KnowledgeGraph whose node ids equal the networkx node ids (0..n-1)."""
    g = KnowledgeGraph()
    for v in sorted(G.nodes()):
        g.add_node(f"{prefix}{v}", node_id=v)
    for u, v in G.edges():
        g.add_edge(u, v, f"r{min(u, v)}_{max(u, v)}")
    return g


def random_connected(rng: np.random.Generator, n: int, p: float) -> nx.Graph:
    """Random spanning tree plus G(n, p) extra edges; always connected."""
    G = nx.Graph()
    G.add_nodes_from(range(n))
    order = rng.permutation(n)
    for i in range(1, n):
        G.add_edge(int(order[i]), int(order[rng.integers(0, i)]))
    for u, v in combinations(range(n), 2):
        if rng.random() < p:
            G.add_edge(u, v)
    return G


def two_triangles() -> KnowledgeGraph:
    g = KnowledgeGraph()
    for a, b in [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")]:
        g.add_edge(a, b, "links")
    return g


def barbell() -> tuple[KnowledgeGraph, int]:
    """Two triangles joined through a single middle node (7 nodes); returns (graph, middle id)."""
    G = nx.barbell_graph(3, 1)
    return from_nx(G), 3


def betweenness_oracle(G: nx.Graph) -> dict[int, float]:
    """Fraction of shortest paths through each node, by explicit enumeration."""
    n = G.number_of_nodes()
    score = {v: 0.0 for v in G}
    for s, t in combinations(sorted(G), 2):
        if not nx.has_path(G, s, t):
            continue
        paths = list(nx.all_shortest_paths(G, s, t))
        for v in G:
            if v in (s, t):
                continue
            score[v] += sum(v in p for p in paths) / len(paths)
    scale = (n - 1) * (n - 2) / 2 if n > 2 else 1.0
    return {v: s / scale for v, s in score.items()}


def bfs_oracle(adj: dict[int, set[int]], source: int) -> dict[int, int]:
    dist, frontier = {source: 0}, [source]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def sample_discrete_power_law(alpha: float, n: int, seed: int, x_min: int = 1, kmax: int = 1_000_000) -> np.ndarray:
    """Inverse-CDF draws from P(k) = k^-alpha / zeta(alpha, x_min), k >= x_min."""
    rng = np.random.default_rng(seed)
    ks = np.arange(x_min, kmax, dtype=float)
    ccdf = zeta(alpha, ks) / zeta(alpha, x_min)
    u = rng.random(n)
    idx = np.searchsorted(-ccdf, -u, side="right") - 1
    return ks[np.clip(idx, 0, len(ks) - 1)].astype(int)


# ---------------------------------------------------------------------------
# synthetic corpus with a scripted chat model

CORPUS = {
    "doc1": [("Spider silk", "has", "High toughness"), ("High toughness", "enables", "Impact resistance"),
             ("Spider silk", "is made of", "Proteins")],
    "doc2": [("Nacre", "has", "High toughness"), ("Nacre", "consists of", "Aragonite platelets"),
             ("Aragonite platelets", "are bonded by", "Proteins")],
    "doc3": [("Bone", "contains", "Collagen"), ("Collagen", "is a", "Proteins"), ("Bone", "contains", "Hydroxyapatite")],
    "doc4": [("Mycelium", "forms", "Composites"), ("Composites", "exhibit", "Impact resistance"),
             ("Mycelium", "contains", "Chitin")],
    "doc5": [("Chitin", "is found in", "Exoskeletons"), ("Exoskeletons", "have", "High toughness"),
             ("Collagen", "is similar to", "Chitin")],
}


def write_corpus(root: Path) -> Path:
    corpus = root / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    for doc, triples in CORPUS.items():
        paras = [f"{a} {r} {b}. " * 8 for a, r, b in triples]
        (corpus / f"{doc}.txt").write_text("\n\n".join(paras) + "\n", encoding="utf-8")
    return corpus


def corpus_script(root: Path) -> Path:
    """Six responses per document chunk, in chunk-id order."""
    out = []
    for doc, triples in sorted(CORPUS.items()):
        records = [{"node_1": a, "node_2": b, "edge": r} for a, r, b in triples]
        out += [
            f"Summary of {doc}.",
            f"- fact one of {doc}\n- fact two of {doc}",
            f"Title of {doc}",
            "Here is a first draft: " + json.dumps(records[:2]),
            json.dumps(records),
            "```json\n" + json.dumps(records) + "\n```",
        ]
    path = root / "script.json"
    path.write_text(json.dumps(out), encoding="utf-8")
    return path


@pytest.fixture
def corpus_dir(tmp_path: Path) -> Path:
    return write_corpus(tmp_path)


@pytest.fixture
def script_file(tmp_path: Path) -> Path:
    return corpus_script(tmp_path)


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion

ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion(request):
    """Record ``(name, limit)`` through ``criterion.start``; the line is written at teardown."""

    class Recorder:
        name = request.node.name
        limit = None
        elapsed = None

        def start(self, name: str, limit: float) -> "Recorder":
            self.name, self.limit = name, limit
            return self

        @contextmanager
        def measure(self):
            t0 = time.perf_counter()
            try:
                yield
            finally:
                self.elapsed = (self.elapsed or 0.0) + time.perf_counter() - t0

        def within_limit(self) -> bool:
            return self.elapsed is not None and self.elapsed < self.limit

    rec = Recorder()
    yield rec
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    status = "SKIP" if rep is not None and rep.skipped else ("PASS" if ok else "FAIL")
    timing = f"{rec.elapsed:.3f}s" if rec.elapsed is not None else "n/a"
    limit = f" limit {rec.limit:g}s" if rec.limit is not None else ""
    line = f"{status} {rec.name} ({timing}{limit})"
    ACCEPTANCE.append(line)
    print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
