"""Structural statistics of knowledge graphs."""

from .centrality import (
    avg_clustering,
    betweenness_centrality,
    bridging_centrality,
    bridging_coefficient,
    clustering_coefficient,
    top_nodes,
)
from .clusters import ClusterReport, cluster_report
from .community import (
    CommunityPartition,
    CommunityReport,
    community_report,
    detect_communities,
    modularity,
)
from .degree import DegreeStats, degree_histogram_log1p, degree_stats, stats_from_counts
from .powerlaw import FitError, PowerLawFit, ccdf_table, fit_power_law

__all__ = [
    "ClusterReport",
    "CommunityPartition",
    "CommunityReport",
    "DegreeStats",
    "FitError",
    "PowerLawFit",
    "avg_clustering",
    "betweenness_centrality",
    "bridging_centrality",
    "bridging_coefficient",
    "ccdf_table",
    "cluster_report",
    "clustering_coefficient",
    "community_report",
    "degree_histogram_log1p",
    "degree_stats",
    "detect_communities",
    "fit_power_law",
    "modularity",
    "stats_from_counts",
    "top_nodes",
]
