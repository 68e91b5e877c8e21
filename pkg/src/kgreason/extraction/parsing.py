"""Recovery of triple lists from free-form model output."""

from __future__ import annotations

import ast
import json
from typing import Any

from ..graph import Triple

KEYS = ("node_1", "node_2", "edge")


def _balanced(text: str, start: int) -> str | None:
    """Substring from ``text[start] == '['`` to its matching bracket, respecting quotes."""
    depth = 0
    quote = None
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if quote:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
            continue
        if ch in "\"'":
            # apostrophes inside bare words are not string delimiters
            prev = text[i - 1] if i else ""
            if ch == "'" and prev.isalnum():
                continue
            quote = ch
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                return text[start:i + 1]
    return None


def first_json_array(text: str) -> list[Any] | None:
    """The first well-formed JSON (or single-quoted Python-literal) list in ``text``."""
    decoder = json.JSONDecoder()
    pos = text.find("[")
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(text, pos)
            if isinstance(value, list):
                return value
        except json.JSONDecodeError:
            chunk = _balanced(text, pos)
            if chunk is not None:
                try:
                    value = ast.literal_eval(chunk)
                    if isinstance(value, list):
                        return value
                except (ValueError, SyntaxError, MemoryError, RecursionError):
                    pass
        pos = text.find("[", pos + 1)
    return None


def triples_from_records(records: list[Any], source_chunk: str | None = None) -> tuple[list[Triple], list[tuple[int, str]]]:
    """Validate ``{node_1, node_2, edge}`` records; returns ``(triples, rejections)``."""
    triples, rejected = [], []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            rejected.append((i, "not an object"))
            continue
        missing = [k for k in KEYS if not isinstance(rec.get(k), str)]
        if missing:
            rejected.append((i, f"missing {', '.join(missing)}"))
            continue
        t = Triple.of(rec["node_1"], rec["edge"], rec["node_2"], source_chunk)
        reason = t.problem()
        if reason:
            rejected.append((i, reason))
            continue
        triples.append(t)
    return triples, rejected


def parse_triples(text: str, source_chunk: str | None = None) -> list[Triple] | None:
    """Triples from the first list in ``text``; ``None`` when no list parses."""
    records = first_json_array(text)
    if records is None:
        return None
    return triples_from_records(records, source_chunk)[0]


def triple_to_record(t: Triple) -> dict[str, str]:
    return {"node_1": t.subject, "node_2": t.object, "edge": t.relation}
