"""Randomized edge sparsification for maximum-weight bipartite matching."""

from .graph import (
    DenseBipartiteGraph,
    EdgeListError,
    SparseBipartiteGraph,
    densify,
    generate_uniform,
    read_edge_list,
    sparsify_all,
    write_edge_list,
)
from .matching import (
    InvariantViolation,
    Matching,
    SolverStats,
    brute_force_oracle,
    check_dual_certificate,
    max_cardinality_check,
    max_weight_matching,
)
from .sparsify import (
    Normalization,
    SparsifyParams,
    SparsifyReport,
    normalization_constant,
    repair_feasibility,
    retention_probability,
    sparsify,
)

__all__ = [
    "DenseBipartiteGraph",
    "SparseBipartiteGraph",
    "EdgeListError",
    "generate_uniform",
    "read_edge_list",
    "write_edge_list",
    "densify",
    "sparsify_all",
    "Matching",
    "SolverStats",
    "InvariantViolation",
    "max_weight_matching",
    "brute_force_oracle",
    "max_cardinality_check",
    "check_dual_certificate",
    "Normalization",
    "SparsifyParams",
    "SparsifyReport",
    "normalization_constant",
    "retention_probability",
    "sparsify",
    "repair_feasibility",
]
