"""Self-contained HTML viewer with embedded graph data and no network fetches."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..graph import KnowledgeGraph
from ..stats.centrality import betweenness_centrality, bridging_centrality
from ..stats.community import detect_communities

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf"]
MIN_RADIUS, MAX_RADIUS = 4.0, 24.0

_TEMPLATE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>__TITLE__</title>
<style>
body { margin: 0; font-family: sans-serif; }
#info { position: absolute; top: 8px; left: 8px; background: #fffd; padding: 4px 8px; font-size: 13px; }
</style>
</head>
<body>
<div id="info">__TITLE__: <span id="hover"></span></div>
<svg id="view" width="100%" height="100%" style="position:absolute;top:0;left:0;height:100vh"></svg>
<script id="graph-data" type="application/json">__DATA__</script>
<script>
(function () {
  var data = JSON.parse(document.getElementById("graph-data").textContent);
  var svg = document.getElementById("view"), NS = "http://www.w3.org/2000/svg";
  var W = window.innerWidth, H = window.innerHeight, nodes = data.nodes, byId = {};
  nodes.forEach(function (n) { n.px = n.x * W; n.py = n.y * H; n.vx = 0; n.vy = 0; byId[n.id] = n; });
  var links = data.edges.map(function (e) { return [byId[e.source], byId[e.target], e]; });
  for (var it = 0; it < 300; it++) {
    var t = 1 - it / 300;
    for (var i = 0; i < nodes.length; i++) for (var j = i + 1; j < nodes.length; j++) {
      var a = nodes[i], b = nodes[j], dx = a.px - b.px, dy = a.py - b.py, d2 = dx * dx + dy * dy + 0.01;
      var f = 800 / d2; a.vx += dx * f; a.vy += dy * f; b.vx -= dx * f; b.vy -= dy * f;
    }
    links.forEach(function (l) {
      var dx = l[1].px - l[0].px, dy = l[1].py - l[0].py, f = 0.02;
      l[0].vx += dx * f; l[0].vy += dy * f; l[1].vx -= dx * f; l[1].vy -= dy * f;
    });
    nodes.forEach(function (n) {
      n.vx += (W / 2 - n.px) * 0.002; n.vy += (H / 2 - n.py) * 0.002;
      n.px += Math.max(-10, Math.min(10, n.vx)) * t; n.py += Math.max(-10, Math.min(10, n.vy)) * t;
      n.vx *= 0.5; n.vy *= 0.5;
    });
  }
  links.forEach(function (l) {
    var e = document.createElementNS(NS, "line");
    e.setAttribute("x1", l[0].px); e.setAttribute("y1", l[0].py);
    e.setAttribute("x2", l[1].px); e.setAttribute("y2", l[1].py);
    e.setAttribute("stroke", "#aaa"); e.setAttribute("stroke-width", 1);
    var tt = document.createElementNS(NS, "title"); tt.textContent = l[2].relation; e.appendChild(tt);
    svg.appendChild(e);
  });
  nodes.forEach(function (n) {
    var c = document.createElementNS(NS, "circle");
    c.setAttribute("cx", n.px); c.setAttribute("cy", n.py); c.setAttribute("r", n.radius);
    c.setAttribute("fill", n.color); c.setAttribute("stroke", "#333");
    c.addEventListener("mouseover", function () {
      document.getElementById("hover").textContent = n.label + " (community " + n.community + ")";
    });
    var tt = document.createElementNS(NS, "title"); tt.textContent = n.label; c.appendChild(tt);
    svg.appendChild(c);
  });
})();
</script>
</body>
</html>
"""


def html_string(g: KnowledgeGraph, sizing: str = "degree", coloring: str = "community", seed: int = 0,
                title: str = "knowledge graph") -> str:
    if sizing == "degree":
        metric = {n: float(d) for n, d in g.degrees().items()}
    elif sizing == "bridging":
        metric = bridging_centrality(g, betweenness_centrality(g))
    else:
        raise ValueError(f"unknown sizing {sizing!r}")
    if coloring != "community":
        raise ValueError(f"unknown coloring {coloring!r}")
    membership = detect_communities(g).membership() if len(g) else {}
    top = max(metric.values(), default=0.0)
    rng = np.random.default_rng(seed)
    pos = rng.random((len(g), 2))
    nodes = []
    for (n, (x, y)) in zip(g.nodes(), pos):
        scaled = metric[n] / top if top > 0 else 0.0
        c = membership.get(n, 0)
        nodes.append({
            "id": n,
            "label": g.label(n),
            "metric": round(metric[n], 12),
            "radius": round(MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * scaled, 6),
            "community": c,
            "color": PALETTE[c % len(PALETTE)],
            "x": round(float(x), 6),
            "y": round(float(y), 6),
        })
    edges = [{"source": e.u, "target": e.v, "relation": e.relation, "multiplicity": e.multiplicity}
             for e in g.edges()]
    data = json.dumps({"nodes": nodes, "edges": edges, "sizing": sizing}, ensure_ascii=False, sort_keys=True)
    data = data.replace("</", "<\\/")
    safe_title = title.replace("&", "&amp;").replace("<", "&lt;")
    return _TEMPLATE.replace("__TITLE__", safe_title).replace("__DATA__", data)


def export_html(g: KnowledgeGraph, path: str | Path, sizing: str = "degree", coloring: str = "community",
                seed: int = 0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(html_string(g, sizing, coloring, seed).encode("utf-8"))
    return path


def embedded_data(html: str) -> dict:
    """Recover the JSON payload from a viewer file."""
    start = html.index('type="application/json">') + len('type="application/json">')
    end = html.index("</script>", start)
    return json.loads(html[start:end].replace("<\\/", "</"))
