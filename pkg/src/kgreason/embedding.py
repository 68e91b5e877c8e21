"""Embedding providers, cosine similarity and node-label indexes."""

from __future__ import annotations

import hashlib
import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .graph import KnowledgeGraph, MergeGroup, normalize_label

log = logging.getLogger(__name__)

_FOLD = re.compile(r"[\s_\-]+")


class EmbeddingError(RuntimeError):
    """Provider failure; ``failed`` lists the texts that could not be embedded."""

    def __init__(self, message: str, failed: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.failed = list(failed)


class EmbeddingProvider(Protocol):
    dimension: int
    max_input_tokens: int

    @property
    def fingerprint(self) -> str: ...

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...


def truncate_tokens(text: str, max_tokens: int) -> str:
    """Whitespace-word approximation of token truncation."""
    words = text.split()
    if len(words) <= max_tokens:
        return text
    return " ".join(words[:max_tokens])


def unit(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if not np.all(np.isfinite(v)):
        raise EmbeddingError("embedding has non-finite entries")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise EmbeddingError("zero vector cannot be normalized")
    return v / norm


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class HashEmbedder:
    """Deterministic offline provider.

    Each text is hashed (with ``seed``) into an RNG seed, expanded to
    ``dimension`` Gaussian coordinates and normalized. Identical text gives
    identical vectors; distinct texts are nearly orthogonal. Case, underscores
    and hyphens are folded before hashing so ``mechanical_properties`` and
    ``mechanical properties`` embed identically. ``overrides`` injects raw
    vectors for specific texts.
    """

    def __init__(self, dimension: int = 1024, seed: int = 0, max_input_tokens: int = 512,
                 overrides: Mapping[str, Sequence[float]] | None = None) -> None:
        self.dimension = dimension
        self.seed = seed
        self.max_input_tokens = max_input_tokens
        self.overrides = {k: unit(v) for k, v in (overrides or {}).items()}
        self.calls = 0

    @property
    def fingerprint(self) -> str:
        return f"hash-mock:d{self.dimension}:s{self.seed}"

    def inject(self, text: str, vector: Sequence[float]) -> None:
        self.overrides[text] = unit(vector)

    def _one(self, text: str) -> np.ndarray:
        if text in self.overrides:
            return self.overrides[text]
        key = _FOLD.sub(" ", text.lower()).strip()
        digest = hashlib.sha256(f"{self.seed}\x00{key}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return unit(rng.standard_normal(self.dimension))

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        self.calls += 1
        if not texts:
            return np.zeros((0, self.dimension))
        return np.vstack([self._one(t) for t in texts])


class HTTPEmbedder:
    """Client for an embeddings endpoint speaking ``{model, input: [...]}``.

    The response must carry ``data: [{"embedding": [...]}, ...]`` in input order.
    """

    def __init__(self, url: str, model: str, dimension: int = 1024, max_input_tokens: int = 512,
                 api_key_env: str | None = None, timeout: float = 60.0) -> None:
        self.url = url
        self.model = model
        self.dimension = dimension
        self.max_input_tokens = max_input_tokens
        self.api_key_env = api_key_env
        self.timeout = timeout

    @property
    def fingerprint(self) -> str:
        return f"http:{self.model}:d{self.dimension}"

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key_env and os.environ.get(self.api_key_env):
            headers["Authorization"] = f"Bearer {os.environ[self.api_key_env]}"
        try:
            resp = requests.post(self.url, json={"model": self.model, "input": list(texts)},
                                 headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise EmbeddingError(f"embedding request failed: {exc}", texts) from exc
        if resp.status_code != 200:
            raise EmbeddingError(f"embedding provider returned {resp.status_code}: {resp.text[:200]}", texts)
        data = resp.json().get("data", [])
        if len(data) != len(texts):
            raise EmbeddingError(f"expected {len(texts)} embeddings, got {len(data)}", texts)
        vecs = np.array([d["embedding"] for d in data], dtype=float)
        if vecs.shape[1] != self.dimension:
            raise EmbeddingError(f"provider returned dimension {vecs.shape[1]}, expected {self.dimension}", texts)
        return vecs


@dataclass(frozen=True)
class NodeMatch:
    node: int
    label: str
    score: float


class NodeEmbeddingIndex:
    """Unit vectors for every node of one graph, rows ordered by node id."""

    def __init__(self, ids: Sequence[int], labels: Sequence[str], vectors: np.ndarray, fingerprint: str) -> None:
        vectors = np.asarray(vectors, dtype=float)
        if len(ids):
            vectors = vectors.reshape(len(ids), -1)
        else:
            vectors = vectors.reshape(0, vectors.shape[-1] if vectors.ndim == 2 else 0)
        if len(ids):
            norms = np.linalg.norm(vectors, axis=1, keepdims=True)
            if np.any(norms == 0) or not np.all(np.isfinite(vectors)):
                raise EmbeddingError("index contains zero or non-finite vectors")
            vectors = vectors / norms
        self.ids = list(ids)
        self.labels = list(labels)
        self.vectors = vectors
        self.fingerprint = fingerprint
        self._row = {n: i for i, n in enumerate(self.ids)}
        self.vectors.setflags(write=False)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._row

    def vector(self, node_id: int) -> np.ndarray:
        return self.vectors[self._row[node_id]]

    def covers(self, g: KnowledgeGraph) -> bool:
        return set(g.nodes()) == set(self.ids) and all(self.labels[self._row[n]] == g.label(n) for n in g.nodes())

    def similarity_matrix(self) -> np.ndarray:
        return self.vectors @ self.vectors.T


def embed_texts(texts: Sequence[str], provider: EmbeddingProvider, batch_size: int = 64,
                workers: int = 1) -> np.ndarray:
    """Embed ``texts`` in batches, truncating each to the provider token limit."""
    texts = [truncate_tokens(t, provider.max_input_tokens) for t in texts]
    batches = [texts[i:i + batch_size] for i in range(0, len(texts), batch_size)]
    if not batches:
        return np.zeros((0, provider.dimension))

    def run(batch):
        try:
            return provider.embed_batch(batch)
        except EmbeddingError:
            raise
        except Exception as exc:
            raise EmbeddingError(f"embedding provider failed: {exc}", batch) from exc

    if workers > 1:
        failed: list[str] = []
        results = []
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, b) for b in batches]
            for b, f in zip(batches, futures):
                try:
                    results.append(f.result())
                except EmbeddingError as exc:
                    failed.extend(exc.failed or b)
        if failed:
            raise EmbeddingError(f"{len(failed)} texts failed to embed", failed)
    else:
        results = [run(b) for b in batches]
    return np.vstack(results)


def embed_nodes(g: KnowledgeGraph, provider: EmbeddingProvider, batch_size: int = 64,
                workers: int = 1) -> NodeEmbeddingIndex:
    ids = g.nodes()
    labels = [g.label(n) for n in ids]
    vecs = embed_texts(labels, provider, batch_size=batch_size, workers=workers)
    return NodeEmbeddingIndex(ids, labels, vecs, provider.fingerprint)


def embed_query(query: str, provider: EmbeddingProvider) -> np.ndarray:
    return unit(embed_texts([query], provider)[0])


def rank_by_vector(index: NodeEmbeddingIndex, vec: np.ndarray, k: int) -> list[NodeMatch]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(index) == 0:
        return []
    scores = np.clip(index.vectors @ unit(vec), -1.0, 1.0)
    order = sorted(range(len(index)), key=lambda i: (-scores[i], index.labels[i]))
    return [NodeMatch(index.ids[i], index.labels[i], float(scores[i])) for i in order[:k]]


def match_nodes(index: NodeEmbeddingIndex, query: str, k: int, provider: EmbeddingProvider) -> list[NodeMatch]:
    """Top-``k`` nodes by cosine similarity to ``query`` (ties by label)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(index) == 0:
        return []
    # exact-label hits reuse the indexed vector so identical text scores exactly 1
    hit = [i for i, lab in enumerate(index.labels) if lab == normalize_label(query)]
    vec = index.vectors[hit[0]] if hit else embed_query(query, provider)
    return rank_by_vector(index, vec, k)


def similarity_merge_groups(index: NodeEmbeddingIndex, g: KnowledgeGraph, eta: float = 0.95) -> list[MergeGroup]:
    """Groups of nodes linked by pairwise similarity above ``eta`` (transitive closure)."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    if not index.covers(g):
        raise EmbeddingError("index does not cover the graph")
    n = len(index)
    if n < 2:
        return []
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # row blocks keep memory at O(block * n)
    block = 1024
    for start in range(0, n, block):
        sims = index.vectors[start:start + block] @ index.vectors.T
        rows, cols = np.nonzero(sims > eta)
        for r, c in zip(rows + start, cols):
            if r < c:
                ra, rb = find(r), find(c)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    buckets: dict[int, list[int]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(index.ids[i])
    groups = [MergeGroup.choose(g, members) for members in buckets.values() if len(members) > 1]
    return sorted(groups, key=lambda grp: min(grp.members))
