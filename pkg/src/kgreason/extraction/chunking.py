from __future__ import annotations

import re
from dataclasses import dataclass

_PARA = re.compile(r"\n\s*\n")


@dataclass(frozen=True)
class DocumentChunk:
    id: str
    text: str
    word_count: int


def strip_markup(text: str) -> str:
    """Drop common Markdown/MMD decoration while keeping paragraph breaks."""
    text = re.sub(r"```.*?```", "", text, flags=re.S)
    text = re.sub(r"!\[[^\]]*\]\([^)]*\)", "", text)
    text = re.sub(r"\[([^\]]+)\]\([^)]*\)", r"\1", text)
    text = re.sub(r"^\s{0,3}#{1,6}\s*", "", text, flags=re.M)
    text = re.sub(r"^\s*[-*+]\s+", "", text, flags=re.M)
    text = re.sub(r"(\*\*|__|\*|`)", "", text)
    return text


def chunk_document(text: str, target_words: int = 800, doc_id: str = "doc") -> list[DocumentChunk]:
    """Split on blank lines, accumulating whole paragraphs up to ``target_words``.

    A paragraph longer than the target becomes a chunk of its own; chunks
    never overlap and never split a paragraph.
    """
    if target_words < 50:
        raise ValueError("target_words must be >= 50")
    paragraphs = [p.strip() for p in _PARA.split(text) if p.strip()]
    chunks: list[list[str]] = []
    current: list[str] = []
    count = 0
    for p in paragraphs:
        n = len(p.split())
        if current and count + n > target_words:
            chunks.append(current)
            current, count = [], 0
        current.append(p)
        count += n
    if current:
        chunks.append(current)
    out = []
    for i, paras in enumerate(chunks):
        body = "\n\n".join(paras)
        out.append(DocumentChunk(f"{doc_id}-{i:04d}", body, len(body.split())))
    return out
