from __future__ import annotations

import ast
import json
from pathlib import Path
from typing import Iterable

from ..extraction.parsing import triple_to_record, triples_from_records
from ..graph import KnowledgeGraph, Triple, build_from_triples, iter_triples


def export_triples_json(source: KnowledgeGraph | Iterable[Triple], path: str | Path) -> Path:
    triples = iter_triples(source) if isinstance(source, KnowledgeGraph) else source
    records = [triple_to_record(t) for t in triples]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(records, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path


def load_records(text: str) -> list:
    """Parse a JSON array; single-quoted (Python-literal) arrays are accepted too."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = ast.literal_eval(text.strip())
        except (ValueError, SyntaxError) as exc:
            raise ValueError(f"not a JSON array of triples: {exc}") from exc
    if not isinstance(data, list):
        raise ValueError("triples file must contain a JSON array")
    return data


def import_triples_json(path: str | Path) -> tuple[list[Triple], list[tuple[int, str]]]:
    """Triples plus ``(index, reason)`` for every rejected record."""
    return triples_from_records(load_records(Path(path).read_text(encoding="utf-8")))


def graph_from_triples_json(path: str | Path) -> KnowledgeGraph:
    triples, rejected = import_triples_json(path)
    g = build_from_triples(triples)
    if rejected:
        g.metadata["rejected_records"] = rejected
    return g
