"""Ontological knowledge graphs from text: construction, statistics and path-based reasoning."""

__version__ = "0.1.0"

from .graph import (
    Edge,
    GraphError,
    KnowledgeGraph,
    MergeGroup,
    Node,
    Triple,
    build_from_triples,
    compose,
    connected_components,
    giant_component,
    merge_nodes,
    normalize_label,
    prune_small_components,
)

__all__ = [
    "Edge",
    "GraphError",
    "KnowledgeGraph",
    "MergeGroup",
    "Node",
    "Triple",
    "__version__",
    "build_from_triples",
    "compose",
    "connected_components",
    "giant_component",
    "merge_nodes",
    "normalize_label",
    "prune_small_components",
]
