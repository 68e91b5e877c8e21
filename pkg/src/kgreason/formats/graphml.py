"""GraphML import/export.

Node data key ``label``; edge data keys ``relation`` (texts joined by "; "),
``multiplicity`` and, for exact round trips, ``relations`` and ``sources`` as
JSON lists. Output bytes depend only on the graph contents.
"""

from __future__ import annotations

import json
import re
import xml.sax
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from ..graph import RELATION_SEPARATOR, GraphError, KnowledgeGraph

NS = "http://graphml.graphdrawing.org/xmlns"

_KEYS = [
    ("label", "node", "label", "string"),
    ("aliases", "node", "aliases", "string"),
    ("relation", "edge", "relation", "string"),
    ("relations", "edge", "relations", "string"),
    ("multiplicity", "edge", "multiplicity", "int"),
    ("sources", "edge", "sources", "string"),
    ("metadata", "graph", "metadata", "string"),
    ("next_id", "graph", "next_id", "int"),
]


class GraphMLError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _data(key: str, value) -> str:
    return f"<data key={quoteattr(key)}>{escape(str(value))}</data>"


def graphml_string(g: KnowledgeGraph) -> str:
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<graphml xmlns="{NS}" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
           f'xsi:schemaLocation="{NS} {NS}/1.0/graphml.xsd">']
    for kid, scope, name, typ in _KEYS:
        out.append(f'  <key id="{kid}" for="{scope}" attr.name="{name}" attr.type="{typ}"/>')
    out.append('  <graph id="G" edgedefault="undirected">')
    meta = {k: v for k, v in g.metadata.items() if k != "rejected"}
    out.append("    " + _data("metadata", json.dumps(meta, sort_keys=True, ensure_ascii=False, default=str)))
    out.append("    " + _data("next_id", g.next_id))
    for n in g.nodes():
        node = g.node(n)
        body = _data("label", node.label)
        if node.aliases:
            body += _data("aliases", json.dumps(node.aliases, ensure_ascii=False))
        out.append(f'    <node id="n{n}">{body}</node>')
    for e in g.edges():
        body = _data("relation", e.relation) + _data("relations", json.dumps(e.relations, ensure_ascii=False))
        body += _data("multiplicity", e.multiplicity)
        if e.sources:
            body += _data("sources", json.dumps(e.sources, ensure_ascii=False))
        out.append(f'    <edge source="n{e.u}" target="n{e.v}">{body}</edge>')
    out += ["  </graph>", "</graphml>"]
    return "\n".join(out) + "\n"


def export_graphml(g: KnowledgeGraph, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(graphml_string(g).encode("utf-8"))
    return path


class _Handler(xml.sax.ContentHandler):
    def __init__(self) -> None:
        super().__init__()
        self.loc = None
        self.keys: dict[str, str] = {}
        self.graph_data: dict[str, str] = {}
        self.nodes: list[tuple[str, dict[str, str], int]] = []
        self.edges: list[tuple[str, str, dict[str, str], int]] = []
        self._target: dict[str, str] | None = None
        self._key: str | None = None
        self._text: list[str] = []
        self._in_graph = False

    def setDocumentLocator(self, locator) -> None:
        self.loc = locator

    def line(self) -> int | None:
        return self.loc.getLineNumber() if self.loc else None

    def startElement(self, name, attrs) -> None:
        name = name.split(":")[-1]
        if name == "key":
            self.keys[attrs.get("id")] = attrs.get("attr.name", attrs.get("id"))
        elif name == "graph":
            # edgedefault is ignored: edges are always stored undirected
            self._in_graph = True
            self._target = self.graph_data
        elif name == "node":
            if "id" not in attrs:
                raise GraphMLError("node without id", self.line())
            data: dict[str, str] = {}
            self.nodes.append((attrs["id"], data, self.line()))
            self._target = data
        elif name == "edge":
            if "source" not in attrs or "target" not in attrs:
                raise GraphMLError("edge without source/target", self.line())
            data = {}
            self.edges.append((attrs["source"], attrs["target"], data, self.line()))
            self._target = data
        elif name == "data":
            self._key = self.keys.get(attrs.get("key"), attrs.get("key"))
            self._text = []

    def characters(self, content) -> None:
        if self._key is not None:
            self._text.append(content)

    def endElement(self, name) -> None:
        name = name.split(":")[-1]
        if name == "data" and self._key is not None:
            if self._target is not None:
                self._target[self._key] = "".join(self._text)
            self._key = None
        elif name in ("node", "edge"):
            self._target = self.graph_data if self._in_graph else None


_NID = re.compile(r"n(\d+)$")


def parse_graphml(source: str | bytes) -> KnowledgeGraph:
    h = _Handler()
    if isinstance(source, str):
        source = source.encode("utf-8")
    try:
        xml.sax.parseString(source, h)
    except xml.sax.SAXParseException as exc:
        raise GraphMLError(exc.getMessage(), exc.getLineNumber()) from exc

    g = KnowledgeGraph()
    if "metadata" in h.graph_data:
        try:
            g.metadata.update(json.loads(h.graph_data["metadata"]))
        except json.JSONDecodeError as exc:
            raise GraphMLError(f"graph metadata is not JSON: {exc}") from exc
    ids: dict[str, int] = {}
    own_ids = all(_NID.match(xid) for xid, _, _ in h.nodes)
    for xid, data, line in h.nodes:
        if xid in ids:
            raise GraphMLError(f"duplicate node id {xid!r}", line)
        label = data.get("label", xid)
        try:
            nid = int(_NID.match(xid).group(1)) if own_ids else None
            if nid is not None and g.find(label) is not None:
                raise GraphMLError(f"duplicate node label {label!r}", line)
            ids[xid] = g.add_node(label, node_id=nid)
        except GraphError as exc:
            raise GraphMLError(str(exc), line) from exc
        if "aliases" in data:
            g.node(ids[xid]).aliases = list(json.loads(data["aliases"]))
    for src, dst, data, line in h.edges:
        if src not in ids or dst not in ids:
            missing = src if src not in ids else dst
            raise GraphMLError(f"edge references missing node {missing!r}", line)
        if "relations" in data:
            rels = json.loads(data["relations"])
        else:
            rels = [r for r in data.get("relation", "").split(RELATION_SEPARATOR) if r]
        try:
            mult = int(data.get("multiplicity", 1))
            g.add_edge(ids[src], ids[dst], rels, mult, json.loads(data.get("sources", "[]")))
        except (GraphError, ValueError) as exc:
            raise GraphMLError(str(exc), line) from exc
    if "next_id" in h.graph_data:
        g._next_id = max(g.next_id, int(h.graph_data["next_id"]))
    return g


def import_graphml(path: str | Path) -> KnowledgeGraph:
    return parse_graphml(Path(path).read_bytes())
