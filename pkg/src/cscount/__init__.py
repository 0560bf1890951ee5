"""Subgraph cardinality estimation over a refined candidate space."""

from .candidate_space import (
    CandidateSpace,
    RefinementConfig,
    RefinementState,
    build_initial_cs,
    refine_candidate_space,
)
from .graph import CycleIndex, GraphFormatError, LabeledGraph, build_cycle_index, dump_graph, load_graph, read_graph
from .oracle import OracleResult, enumerate_candidate_trees, exact_count
from .pipeline import EstimateResult, EstimatorConfig, estimate, q_error

__all__ = [
    "CandidateSpace",
    "CycleIndex",
    "EstimateResult",
    "EstimatorConfig",
    "GraphFormatError",
    "LabeledGraph",
    "OracleResult",
    "RefinementConfig",
    "RefinementState",
    "build_cycle_index",
    "build_initial_cs",
    "dump_graph",
    "enumerate_candidate_trees",
    "estimate",
    "exact_count",
    "load_graph",
    "q_error",
    "read_graph",
    "refine_candidate_space",
]
