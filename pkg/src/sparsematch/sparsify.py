"""Randomized edge sparsification of complete bipartite graphs.

Each edge ``e`` survives independently with probability ``min(1, c * w(e)**k)``.
The constant ``c`` is chosen so that about ``n * log2(n)`` edges survive in
expectation, either exactly from the weights at hand or from the closed form
``(k + 1) * log2(n) / n`` that holds for uniform weights.  Retained edges keep
their original weight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .graph import DenseBipartiteGraph, SparseBipartiteGraph
from .matching import max_cardinality_check

__all__ = [
    "Normalization",
    "SparsifyParams",
    "SparsifyReport",
    "default_target",
    "normalization_constant",
    "retention_probability",
    "sparsify",
    "repair_feasibility",
]


# Distinct stream tag: with a bare default_rng(seed), a graph generated from the
# same seed would see its own weights as the retention draws.
_STREAM_TAG = 0x5BA751F1


class Normalization(enum.Enum):
    EXACT = "exact"
    CLOSED_FORM = "closed"


@dataclass(frozen=True)
class SparsifyParams:
    k: int = 1
    normalization: Normalization = Normalization.EXACT
    seed: int = 0
    target_edges: float | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.target_edges is not None and not self.target_edges > 0:
            raise ValueError(f"target_edges must be positive, got {self.target_edges}")
        object.__setattr__(self, "normalization", Normalization(self.normalization))


@dataclass(frozen=True)
class SparsifyReport:
    retained_count: int
    expected_count: float
    c_used: float
    clamped_edges: int


def default_target(n: int) -> float:
    return n * math.log2(n)


def _check_target(n: int, target_edges: float | None) -> float:
    if n < 2:
        raise ValueError(f"sparsification needs n >= 2, got {n}")
    if target_edges is None:
        return default_target(n)
    if not 0 < target_edges <= n * n:
        raise ValueError(f"target_edges must lie in (0, {n * n}], got {target_edges}")
    return float(target_edges)


def _power(weights: np.ndarray, k: int) -> np.ndarray:
    return weights if k == 1 else np.power(weights, k)


def normalization_constant(
    g: DenseBipartiteGraph,
    k: int,
    mode: Normalization = Normalization.EXACT,
    target_edges: float | None = None,
) -> float:
    """Scale ``c`` making ``sum(c * w**k)`` hit the target edge count."""
    n = g.n
    target = _check_target(n, target_edges)
    if Normalization(mode) is Normalization.EXACT:
        total = float(_power(g.weights, k).sum())
        if total <= 0.0:
            raise ValueError("all weights are zero; exact normalization is undefined")
        return target / total
    # sum of w**k over n**2 uniform weights is about n**2 / (k + 1)
    return (k + 1) * math.log2(n) / n * (target / default_target(n))


def retention_probability(w, c: float, k: int):
    """``min(1, c * w**k)``; works elementwise on arrays.

    Very small weights can underflow ``w**k`` to zero for large ``k``.
    """
    p = np.minimum(1.0, c * np.power(w, k))
    return float(p) if np.ndim(p) == 0 else p


def sparsify(g: DenseBipartiteGraph, params: SparsifyParams) -> tuple[SparseBipartiteGraph, SparsifyReport]:
    """Keep each edge independently with probability ``retention_probability(w, c, k)``.

    Deterministic in ``(g, params)``.  The realized edge count concentrates
    around ``expected_count`` (fluctuations of order its square root).
    """
    k = params.k
    c = normalization_constant(g, k, params.normalization, params.target_edges)
    raw = c * _power(g.weights, k)
    p = np.minimum(raw, 1.0)
    draws = np.random.default_rng([params.seed, _STREAM_TAG]).random(p.shape)
    # draws lie in [0, 1): p == 0 is never kept, p == 1 always is
    left, right = np.nonzero(draws < p)
    sparse = SparseBipartiteGraph(g.n, left, right, g.weights[left, right])
    report = SparsifyReport(
        retained_count=int(left.size),
        expected_count=float(p.sum()),
        c_used=float(c),
        clamped_edges=int(np.count_nonzero(raw > 1.0)),
    )
    return sparse, report


def repair_feasibility(
    g_dense: DenseBipartiteGraph,
    g_sparse: SparseBipartiteGraph,
    batch_growth: int | None = None,
) -> SparseBipartiteGraph:
    """Add back removed edges, heaviest first, until a perfect matching exists.

    Batches start at ``batch_growth`` edges (default ``n``) and double, so at
    most O(log n) cardinality checks run.  A feasible input comes back as is.
    """
    n = g_dense.n
    if g_sparse.n != n:
        raise ValueError("dense and sparse graphs differ in n")
    if max_cardinality_check(g_sparse) == n:
        return g_sparse
    batch = n if batch_growth is None else int(batch_growth)
    if batch < 1:
        raise ValueError(f"batch_growth must be positive, got {batch_growth}")

    present = np.zeros(n * n, dtype=bool)
    present[g_sparse.edge_keys()] = True
    flat = g_dense.weights.ravel()
    missing = np.flatnonzero(~present)
    missing = missing[np.argsort(-flat[missing], kind="stable")]

    added = 0
    while True:
        added = min(added + batch, missing.size)
        batch *= 2
        extra = missing[:added]
        left = np.concatenate((g_sparse.left, extra // n))
        right = np.concatenate((g_sparse.right, extra % n))
        weight = np.concatenate((g_sparse.weight, flat[extra]))
        repaired = SparseBipartiteGraph(n, left, right, weight)
        if added == missing.size or max_cardinality_check(repaired) == n:
            return repaired
