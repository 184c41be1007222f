"""Compressed labeled trees with cluster-based navigation and
context-boosted label coding."""
from .clustering import (Clustering, ClusterStructure, auto_m, build_cluster_structure,
                         cluster_greedy, entropy_bound_report, validate_clustering)
from .codec import boosted_encode, choose_sampling, zo_encode
from .entropy import all_measures, context_tables
from .primitives import BitVector, BPTree, PartialSums
from .structure import CorruptContainer, SuccinctLabeledTree, UnsupportedQuery
from .tree import LabeledTree, generate_tree, naive_query, parse_ltree, parse_xml_skeleton

__version__ = "0.1.0"

__all__ = [
    "BPTree",
    "BitVector",
    "ClusterStructure",
    "Clustering",
    "CorruptContainer",
    "LabeledTree",
    "PartialSums",
    "SuccinctLabeledTree",
    "UnsupportedQuery",
    "all_measures",
    "auto_m",
    "boosted_encode",
    "build_cluster_structure",
    "choose_sampling",
    "cluster_greedy",
    "context_tables",
    "entropy_bound_report",
    "generate_tree",
    "naive_query",
    "parse_ltree",
    "parse_xml_skeleton",
    "validate_clustering",
    "zo_encode",
]
