"""``kgreason`` command-line interface.

Every verb writes its artifacts inside the run directory::

    chunks/ contexts/ extractions/ graphs/ reports/ transcripts/ run.json

Exit status is 0 on success and 1 on any error (2 for usage errors). With
``--json`` a result object is printed to stdout and errors are written to
stderr as ``{"error": <type>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .config import RunConfig, load_config
from .graph import KnowledgeGraph, merge_nodes, prune_small_components

log = logging.getLogger("kgreason")

RUN_SUBDIRS = ("chunks", "contexts", "extractions", "graphs", "reports", "transcripts")


class CLIError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# helpers


def load_graph(path: str | Path) -> KnowledgeGraph:
    from .formats import graph_from_triples_json, import_graphml

    path = Path(path)
    if not path.exists():
        raise CLIError(f"graph file not found: {path}")
    if path.suffix.lower() == ".json":
        return graph_from_triples_json(path)
    return import_graphml(path)


def _versions() -> dict[str, str]:
    import networkx
    import numpy
    import scipy

    return {"kgreason": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "networkx": networkx.__version__}


class Run:
    """Run directory plus the resolved configuration."""

    def __init__(self, cfg: RunConfig, command: str, args: dict[str, Any]) -> None:
        self.cfg = cfg
        self.root = Path(cfg.run_dir)
        for sub in RUN_SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._record(command, args)

    def _record(self, command: str, args: dict[str, Any]) -> None:
        path = self.root / "run.json"
        history = []
        if path.exists():
            try:
                history = json.loads(path.read_text(encoding="utf-8")).get("commands", [])
            except (json.JSONDecodeError, AttributeError):
                history = []
        history.append({"command": command, "args": args})
        data = {"config": self.cfg.as_dict(), "seed": self.cfg.seed, "versions": _versions(), "commands": history}
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")

    def path(self, sub: str, name: str) -> Path:
        return self.root / sub / name


def _out_path(run: Run, explicit: str | None, sub: str, default: str) -> Path:
    """Explicit output paths are taken relative to the run directory."""
    if explicit is None:
        return run.path(sub, default)
    p = Path(explicit)
    return p if p.is_absolute() else run.root / p


# ---------------------------------------------------------------------------
# verbs


def cmd_ingest(args, run: Run) -> dict:
    from .embedding import embed_nodes, similarity_merge_groups
    from .extraction import OK, build_corpus_graph, load_corpus, process_chunks
    from .formats import export_graphml, export_triples_json

    cfg = run.cfg
    chunks = load_corpus(args.corpus, cfg.pipeline.target_words)
    if not chunks:
        raise CLIError(f"no text found under {args.corpus}")
    llm = cfg.chat_client(audit_dir=run.root / "transcripts")
    results = process_chunks(chunks, llm, run.root, workers=cfg.pipeline.workers,
                             temperature=cfg.pipeline.temperature)
    raw = build_corpus_graph(results)
    export_graphml(raw, run.path("graphs", "corpus.graphml"))
    provider = cfg.embedder()
    index = embed_nodes(raw, provider, cfg.embedding.batch_size, cfg.embedding.workers)
    groups = similarity_merge_groups(index, raw, cfg.pipeline.eta)
    g = merge_nodes(raw, groups)
    g.metadata["merged_groups"] = len(groups)
    if args.prune:
        g = prune_small_components(g, args.prune)
    out = _out_path(run, args.out, "graphs", "graph.graphml")
    export_graphml(g, out)
    export_triples_json(g, run.path("graphs", "triples.json"))
    return {"chunks": len(chunks), "ok": sum(r.status == OK for r in results),
            "failed": sum(r.status != OK for r in results), "nodes": len(g), "edges": g.number_of_edges(),
            "merged_groups": len(groups), "graph": str(out)}


def cmd_stats(args, run: Run) -> dict:
    from . import plotting
    from .formats import histogram_rows, write_csv, write_json
    from .stats import (avg_clustering, betweenness_centrality, bridging_centrality, degree_histogram_log1p,
                        degree_stats, top_nodes)

    g = load_graph(args.graph)
    ds = degree_stats(g)
    bc = betweenness_centrality(g)
    br = bridging_centrality(g, bc)
    report: dict[str, Any] = {
        "graph": str(args.graph),
        "degree": ds.as_dict(),
        "avg_clustering": avg_clustering(g),
        "top_betweenness": [{"label": g.label(n), "score": bc[n]} for n in top_nodes(bc, g, args.top)],
        "top_bridging": [{"label": g.label(n), "score": br[n]} for n in top_nodes(br, g, args.top)],
    }
    counts, edges = degree_histogram_log1p(g, args.bins)
    write_csv(("bin_edge", "count"), histogram_rows(counts, edges), run.path("reports", "degree_histogram.csv"))
    if args.clusters:
        from .embedding import embed_nodes
        from .stats import cluster_report

        cr = cluster_report(embed_nodes(g, run.cfg.embedder()), args.clusters, seed=run.cfg.seed)
        report["clusters"] = {"n_clusters": cr.n_clusters, "sizes": [len(m) for m in cr.members],
                              "nearest_labels": cr.nearest_labels}
        if not args.no_plots:
            plotting.plot_clusters(cr.projection, cr.assignment, run.path("reports", "clusters.png"))
    write_json(report, run.path("reports", "stats.json"))
    if not args.no_plots and len(g):
        plotting.plot_degree_histogram(counts, edges, run.path("reports", "degree_histogram.png"))
        plotting.plot_degree_loglog(list(g.degrees().values()), run.path("reports", "degree_loglog.png"))
    return report


def cmd_communities(args, run: Run) -> dict:
    from . import plotting
    from .formats import write_json
    from .stats import community_report, detect_communities

    g = load_graph(args.graph)
    part = detect_communities(g, args.method)
    rep = community_report(g, part, top_k=args.top)
    data = {"method": part.method, "modularity": part.modularity, "count": len(part.communities),
            "partition": [sorted(g.label(n) for n in c) for c in part.communities], "report": rep}
    write_json(data, run.path("reports", "communities.json"))
    if not args.no_plots and part.communities:
        plotting.plot_community_sizes([len(c) for c in part.communities], run.path("reports", "community_sizes.png"))
    return {"method": part.method, "modularity": part.modularity, "count": len(part.communities),
            "sizes": [len(c) for c in part.communities]}


def cmd_fit_powerlaw(args, run: Run) -> dict:
    from . import plotting
    from .formats import write_csv, write_json
    from .stats import ccdf_table, fit_power_law

    g = load_graph(args.graph)
    degrees = [d for d in g.degrees().values() if d > 0]
    fit = fit_power_law(degrees, x_min=args.xmin, min_tail=args.min_tail)
    rows = ccdf_table(degrees, fit)
    write_json({"graph": str(args.graph), "fit": asdict(fit)}, run.path("reports", "powerlaw.json"))
    write_csv(("degree", "empirical_ccdf", "fitted_ccdf"), rows, run.path("reports", "degree_ccdf.csv"))
    if not args.no_plots:
        plotting.plot_ccdf(rows, run.path("reports", "degree_ccdf.png"), fit.alpha)
    return asdict(fit)


def cmd_path(args, run: Run) -> dict:
    from .embedding import embed_nodes
    from .formats import export_graphml, write_json
    from .llm import ChatRequest
    from .paths import PathQuery, assemble_context, find_paths

    cfg = run.cfg
    g = load_graph(args.graph)
    provider = cfg.embedder()
    index = embed_nodes(g, provider, cfg.embedding.batch_size, cfg.embedding.workers)
    k = args.k if args.k is not None else cfg.pipeline.k
    hops = args.hops if args.hops is not None else cfg.pipeline.expansion_hops
    bundle = find_paths(g, index, provider, PathQuery(args.term_a, args.term_b, k, hops))
    doc = assemble_context(bundle)
    text = doc.render()
    ctx_path = _out_path(run, args.context_out, "reports", "context.txt")
    ctx_path.parent.mkdir(parents=True, exist_ok=True)
    ctx_path.write_text(text, encoding="utf-8")
    if bundle.subgraph is not None:
        export_graphml(bundle.subgraph, run.path("graphs", "path_subgraph.graphml"))
    export_graphml(bundle.merged_view, run.path("graphs", "paths_merged.graphml"))
    export_graphml(bundle.separate_view, run.path("graphs", "paths_separate.graphml"))
    result = {
        "term_a": args.term_a, "term_b": args.term_b,
        "matches_a": [asdict(m) for m in bundle.matches_a],
        "matches_b": [asdict(m) for m in bundle.matches_b],
        "slots": {f"{i},{j}": (None if p is None else {"labels": p.labels, "relations": p.relations,
                                                       "hops": len(p), "duplicate_of": p.duplicate_of})
                  for (i, j), p in sorted(bundle.slots.items())},
        "context": str(ctx_path),
    }
    if args.ask:
        answer = cfg.chat_client(audit_dir=run.root / "transcripts").complete(
            ChatRequest.of(text, temperature=cfg.pipeline.temperature))
        ans_path = run.path("transcripts", "path_answer.txt")
        ans_path.write_text(answer.rstrip("\n") + "\n", encoding="utf-8")
        result["answer"] = str(ans_path)
    write_json(result, run.path("reports", "paths.json"))
    if not args.json:
        sys.stdout.write(text)
    return result


def cmd_isomorph(args, run: Run) -> dict:
    from .formats import write_json
    from .isomorphism import find_isomorphic_subgraphs, mapping_report

    g1, g2 = load_graph(args.g1), load_graph(args.g2)
    mappings, skipped = find_isomorphic_subgraphs(g1, g2, run.cfg.iso_constraints())
    out = []
    for i, m in enumerate(mappings):
        rep = mapping_report(g1, g2, m)
        run.path("reports", f"isomorph_{i}.csv").write_text(rep.to_csv(), encoding="utf-8")
        run.path("reports", f"isomorph_{i}.tex").write_text(rep.to_latex(), encoding="utf-8")
        out.append({"size": len(m.node_pairs), "candidates": list(m.candidates),
                    "nodes": [[g1.label(u), g2.label(v)] for u, v in sorted(m.node_pairs.items())]})
    result = {"mappings": out, "skipped": [list(s) for s in skipped]}
    write_json(result, run.path("reports", "isomorph.json"))
    return {"mappings": len(out), "sizes": [m["size"] for m in out], "skipped": len(skipped)}


def cmd_augment(args, run: Run) -> dict:
    from .extraction import augment_graph
    from .formats import export_graphml

    cfg = run.cfg
    base, addition = load_graph(args.graph), load_graph(args.addition)
    prune = args.prune if args.prune is not None else cfg.pipeline.prune_threshold
    g = augment_graph(base, addition, cfg.embedder(), cfg.pipeline.eta, prune or None, not args.keep_all)
    out = _out_path(run, args.out, "graphs", "augmented.graphml")
    export_graphml(g, out)
    return {"nodes": len(g), "edges": g.number_of_edges(), "merged_groups": g.metadata.get("merged_groups", 0),
            "graph": str(out)}


def cmd_duet(args, run: Run) -> dict:
    from .llm import CHEF, ENGINEER, AgentPersona, run_agent_duet, summarize_transcript

    personas = {"chef": CHEF, "engineer": ENGINEER}
    asker = AgentPersona(args.asker, personas[args.asker])
    responder = AgentPersona(args.responder, personas[args.responder])
    llm = run.cfg.chat_client(audit_dir=run.root / "transcripts")
    tr = run_agent_duet(args.question, asker, responder, args.turns, llm)
    if not args.no_summary:
        tr = summarize_transcript(tr, llm)
    stem = args.name
    run.path("transcripts", f"{stem}.txt").write_text(tr.full_text(), encoding="utf-8")
    run.path("transcripts", f"{stem}.json").write_text(tr.to_json() + "\n", encoding="utf-8")
    return {"turns": len(tr.turns), "transcript": str(run.path("transcripts", f"{stem}.txt"))}


def cmd_export(args, run: Run) -> dict:
    from .formats import export_graphml, export_html, export_triples_json

    g = load_graph(args.graph)
    suffix = {"graphml": "graphml", "triples": "json", "html": "html"}[args.format]
    out = _out_path(run, args.out, "graphs", f"{Path(args.graph).stem}.{suffix}")
    if args.format == "graphml":
        export_graphml(g, out)
    elif args.format == "triples":
        export_triples_json(g, out)
    else:
        export_html(g, out, sizing=args.sizing, seed=run.cfg.seed)
    return {"format": args.format, "path": str(out)}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--run-dir", help="run directory (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--mock", action="store_true", help="use the offline chat and embedding providers")
    common.add_argument("--script", help="scripted chat responses (JSON list); implies a mock chat provider")
    common.add_argument("--json", action="store_true", help="machine-readable stdout and error output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="kgreason", description="Knowledge-graph construction and reasoning.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="corpus -> knowledge graph")
    s.add_argument("corpus", help="directory of .txt/.md/.mmd files, or a single file")
    s.add_argument("--out", help="output GraphML (default graphs/graph.graphml)")
    s.add_argument("--prune", type=int, default=0, help="drop components smaller than this (0 keeps all)")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("stats", parents=[common], help="degree, clustering and centrality report")
    s.add_argument("graph")
    s.add_argument("--bins", type=int, default=30)
    s.add_argument("--top", type=int, default=10)
    s.add_argument("--clusters", type=int, default=0, help="also cluster node embeddings into N groups")
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("communities", parents=[common], help="community detection report")
    s.add_argument("graph")
    s.add_argument("--method", choices=("greedy_modularity", "girvan_newman"), default="greedy_modularity")
    s.add_argument("--top", type=int, default=5)
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_communities)

    s = sub.add_parser("fit-powerlaw", parents=[common], help="discrete power-law fit of the degree tail")
    s.add_argument("graph")
    s.add_argument("--xmin", type=int)
    s.add_argument("--min-tail", type=int, default=10)
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_fit_powerlaw)

    s = sub.add_parser("path", parents=[common], help="paths between two terms and the reasoning context")
    s.add_argument("graph")
    s.add_argument("term_a")
    s.add_argument("term_b")
    s.add_argument("--k", type=int)
    s.add_argument("--hops", type=int)
    s.add_argument("--context-out", help="context text file (default reports/context.txt)")
    s.add_argument("--ask", action="store_true", help="send the context to the chat provider")
    s.set_defaults(func=cmd_path)

    s = sub.add_parser("isomorph", parents=[common], help="structurally identical subgraphs of two graphs")
    s.add_argument("g1")
    s.add_argument("g2")
    s.set_defaults(func=cmd_isomorph)

    s = sub.add_parser("augment", parents=[common], help="merge a new graph into an existing one")
    s.add_argument("graph")
    s.add_argument("addition")
    s.add_argument("--out")
    s.add_argument("--prune", type=int, help="component size threshold (default from config)")
    s.add_argument("--keep-all", action="store_true", help="keep every component, not just the giant one")
    s.set_defaults(func=cmd_augment)

    s = sub.add_parser("duet", parents=[common], help="two-agent conversation and its summary")
    s.add_argument("question")
    s.add_argument("--turns", type=int, default=10)
    s.add_argument("--asker", choices=("chef", "engineer"), default="chef")
    s.add_argument("--responder", choices=("chef", "engineer"), default="engineer")
    s.add_argument("--name", default="duet", help="transcript file stem")
    s.add_argument("--no-summary", action="store_true")
    s.set_defaults(func=cmd_duet)

    s = sub.add_parser("export", parents=[common], help="write a graph as GraphML, triples JSON or HTML")
    s.add_argument("graph")
    s.add_argument("--format", choices=("graphml", "triples", "html"), default="graphml")
    s.add_argument("--sizing", choices=("degree", "bridging"), default="degree")
    s.add_argument("--out")
    s.set_defaults(func=cmd_export)
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.run_dir:
        cfg.run_dir = args.run_dir
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mock:
        cfg.chat.kind = cfg.embedding.kind = "mock"
    if args.script:
        cfg.chat.kind, cfg.chat.script = "mock", args.script
    return cfg.validate()


def _emit(data: Any) -> None:
    from .formats import to_json

    sys.stdout.write(to_json(data))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        recorded = {k: v for k, v in vars(args).items() if k not in ("func", "json", "verbose")}
        run = Run(cfg, args.command, recorded)
        result = args.func(args, run)
    except Exception as exc:  # noqa: BLE001 - every failure becomes an exit status
        if args.verbose:
            log.exception("command failed")
        if args.json:
            sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        else:
            sys.stderr.write(f"kgreason {args.command}: error: {exc}\n")
        return 1
    if args.json:
        _emit(result)
    elif args.command != "path":
        for key, value in result.items():
            if not isinstance(value, (dict, list)):
                sys.stdout.write(f"{key}: {value}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
