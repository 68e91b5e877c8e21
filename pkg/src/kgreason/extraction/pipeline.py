"""Text corpus to knowledge graph: distillation, triple extraction, assembly."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..embedding import EmbeddingProvider, embed_nodes, similarity_merge_groups
from ..graph import (
    KnowledgeGraph,
    Triple,
    build_from_triples,
    compose,
    giant_component,
    merge_nodes,
    prune_small_components,
)
from ..llm import ChatClient, ChatRequest, LLMError
from . import prompts
from .chunking import DocumentChunk, chunk_document, strip_markup
from .parsing import first_json_array, triple_to_record, triples_from_records

log = logging.getLogger(__name__)

OK = "ok"
FAILED_FIRST = "failed_first_pass"
FAILED_BOTH = "failed_both_passes"

TEXT_SUFFIXES = (".txt", ".md", ".mmd", ".markdown")


class DistillationError(RuntimeError):
    def __init__(self, stage: str, chunk_id: str = "") -> None:
        super().__init__(f"empty completion at distillation stage {stage!r} for chunk {chunk_id or '?'}")
        self.stage = stage
        self.chunk_id = chunk_id


@dataclass
class RawContext:
    title: str
    summary: str
    bullets: list[str]
    chunk_id: str = ""

    def extraction_text(self) -> str:
        """Summary and bullet list; the title is metadata only."""
        return self.summary + "\n\n" + "\n".join(self.bullets)


@dataclass
class ExtractionResult:
    chunk_id: str
    triples: list[Triple] = field(default_factory=list)
    status: str = FAILED_FIRST
    raw_outputs: list[str] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "status": self.status,
            "triples": [triple_to_record(t) for t in self.triples],
            "raw_outputs": self.raw_outputs,
            "rejected": [list(r) for r in self.rejected],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionResult":
        triples, _ = triples_from_records(data.get("triples", []), data["chunk_id"])
        return cls(data["chunk_id"], triples, data["status"], list(data.get("raw_outputs", [])),
                   [tuple(r) for r in data.get("rejected", [])])


def _bullet_lines(text: str) -> list[str]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    return lines


def distill_chunk(chunk: DocumentChunk, llm: ChatClient, temperature: float = 0.1) -> RawContext:
    """Summary, then bullets and title derived from the summary (three completions)."""
    def ask(stage: str, system: str, user: str) -> str:
        out = llm.complete(ChatRequest.of(user, system, temperature=temperature)).strip()
        if not out:
            raise DistillationError(stage, chunk.id)
        return out

    summary = ask("summary", prompts.DISTILL_SYSTEM, prompts.fill(prompts.SUMMARY_PROMPT, text=chunk.text))
    bullets = ask("bullets", prompts.DISTILL_SYSTEM, prompts.fill(prompts.BULLETS_PROMPT, summary=summary))
    title = ask("title", prompts.TITLE_SYSTEM, prompts.fill(prompts.TITLE_PROMPT, summary=summary))
    return RawContext(title, summary, _bullet_lines(bullets), chunk.id)


def extract_triples(context: RawContext, llm: ChatClient, temperature: float = 0.1,
                    result: ExtractionResult | None = None) -> ExtractionResult:
    """Ontology pass, renaming pass and format pass; the last output is parsed.

    Pass ``result`` to append raw outputs to an earlier attempt.
    """
    res = result or ExtractionResult(context.chunk_id)
    ctx = context.extraction_text()

    def ask(user: str, system: str | None = None) -> str:
        out = llm.complete(ChatRequest.of(user, system, temperature=temperature))
        res.raw_outputs.append(out)
        return out

    try:
        first = ask(prompts.fill(prompts.ONTOLOGY_USER, context=ctx), prompts.ONTOLOGY_SYSTEM)
        refined = ask(prompts.fill(prompts.REFINE_PROMPT, context=ctx, response=first))
        final = ask(prompts.fill(prompts.FORMAT_PROMPT, response=refined))
    except LLMError as exc:
        log.warning("extraction failed for %s: %s", context.chunk_id, exc)
        res.status = FAILED_FIRST
        return res
    records = first_json_array(final)
    if records is None:
        res.status = FAILED_FIRST
        return res
    triples, rejected = triples_from_records(records, context.chunk_id)
    res.triples, res.rejected = triples, rejected
    res.status = OK if triples else FAILED_FIRST
    return res


def retry_failed(results: Sequence[ExtractionResult], contexts: dict[str, RawContext], llm: ChatClient,
                 temperature: float = 0.1) -> list[ExtractionResult]:
    """One more extraction attempt for every first-pass failure."""
    out = []
    for r in results:
        if r.status != FAILED_FIRST:
            out.append(r)
            continue
        ctx = contexts.get(r.chunk_id)
        if ctx is None:
            r.status = FAILED_BOTH
            out.append(r)
            continue
        retried = extract_triples(ctx, llm, temperature, result=r)
        if retried.status != OK:
            retried.status = FAILED_BOTH
        out.append(retried)
    return out


def build_corpus_graph(results: Iterable[ExtractionResult]) -> KnowledgeGraph:
    """Compose per-chunk graphs in chunk-id order."""
    ok = sorted((r for r in results if r.status == OK), key=lambda r: r.chunk_id)
    if not ok:
        raise ValueError("no successful extraction results to assemble")
    g = KnowledgeGraph()
    for r in ok:
        g = compose(g, build_from_triples(r.triples))
    g.metadata["chunks"] = len(ok)
    return g


def augment_graph(global_graph: KnowledgeGraph, addition: KnowledgeGraph, provider: EmbeddingProvider,
                  eta: float = 0.95, prune_threshold: int | None = 10, giant_only: bool = True) -> KnowledgeGraph:
    """Compose, merge similar labels, then optionally prune and keep the giant component."""
    g = compose(global_graph, addition)
    if len(g) == 0:
        return g
    index = embed_nodes(g, provider)
    groups = similarity_merge_groups(index, g, eta)
    g = merge_nodes(g, groups)
    g.metadata["merged_groups"] = len(groups)
    if prune_threshold:
        g = prune_small_components(g, prune_threshold)
    if giant_only and len(g):
        g = giant_component(g)
    return g


# ---------------------------------------------------------------------------
# corpus runs with on-disk artifacts


def load_corpus(path: str | Path, target_words: int = 800) -> list[DocumentChunk]:
    """Chunks for every text/markup file under ``path`` (sorted by file name)."""
    path = Path(path)
    files = [path] if path.is_file() else sorted(p for p in path.rglob("*") if p.suffix.lower() in TEXT_SUFFIXES)
    chunks = []
    for f in files:
        text = f.read_text(encoding="utf-8")
        if f.suffix.lower() != ".txt":
            text = strip_markup(text)
        doc_id = f.relative_to(path).with_suffix("").as_posix().replace("/", "_") if path.is_dir() else f.stem
        chunks.extend(chunk_document(text, target_words, doc_id))
    return chunks


def _dump(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def process_chunks(chunks: Sequence[DocumentChunk], llm: ChatClient, run_dir: str | Path | None = None,
                   workers: int = 1, temperature: float = 0.1, retry: bool = True) -> list[ExtractionResult]:
    """Distill and extract every chunk, persisting artifacts under ``run_dir``.

    Chunks whose extraction artifact already has status ``ok`` are loaded
    instead of recomputed. With ``workers > 1`` chunks run concurrently; use an
    order-independent client in that case.
    """
    root = Path(run_dir) if run_dir else None
    contexts: dict[str, RawContext] = {}

    def one(chunk: DocumentChunk) -> ExtractionResult:
        if root:
            done = root / "extractions" / f"{chunk.id}.json"
            if done.exists():
                prev = ExtractionResult.from_dict(json.loads(done.read_text(encoding="utf-8")))
                if prev.status == OK:
                    return prev
            _dump(root / "chunks" / f"{chunk.id}.json", asdict(chunk))
        try:
            ctx = distill_chunk(chunk, llm, temperature)
        except (DistillationError, LLMError) as exc:
            log.warning("distillation failed for %s: %s", chunk.id, exc)
            return ExtractionResult(chunk.id, status=FAILED_BOTH, raw_outputs=[str(exc)])
        contexts[chunk.id] = ctx
        if root:
            _dump(root / "contexts" / f"{chunk.id}.json", asdict(ctx))
        return extract_triples(ctx, llm, temperature)

    ordered = sorted(chunks, key=lambda c: c.id)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, ordered))
    else:
        results = [one(c) for c in ordered]
    if retry:
        results = retry_failed(results, contexts, llm, temperature)
    if root:
        for r in results:
            _dump(root / "extractions" / f"{r.chunk_id}.json", r.to_dict())
    return results
