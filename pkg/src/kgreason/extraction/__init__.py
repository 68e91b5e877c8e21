from .chunking import DocumentChunk, chunk_document, strip_markup
from .parsing import first_json_array, parse_triples, triple_to_record, triples_from_records
from .pipeline import (
    FAILED_BOTH,
    FAILED_FIRST,
    OK,
    DistillationError,
    ExtractionResult,
    RawContext,
    augment_graph,
    build_corpus_graph,
    distill_chunk,
    extract_triples,
    load_corpus,
    process_chunks,
    retry_failed,
)

__all__ = [
    "DistillationError",
    "DocumentChunk",
    "ExtractionResult",
    "FAILED_BOTH",
    "FAILED_FIRST",
    "OK",
    "RawContext",
    "augment_graph",
    "build_corpus_graph",
    "chunk_document",
    "distill_chunk",
    "extract_triples",
    "first_json_array",
    "load_corpus",
    "parse_triples",
    "process_chunks",
    "retry_failed",
    "strip_markup",
    "triple_to_record",
    "triples_from_records",
]
