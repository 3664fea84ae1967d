"""Dense and sparse weighted bipartite graphs with edge weights in [0, 1].

Both partitions have ``n`` nodes indexed ``0 .. n-1``.  A dense graph stores
the full ``n x n`` weight matrix (``m = n**2`` edges); a sparse graph stores an
explicit edge list.  Weights are 64-bit floats.

An absent edge and an edge of weight 0 are interchangeable for maximum-weight
matching on nonnegative weights, so the sparse format may omit zero edges.
"""

from __future__ import annotations

import io
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from typing import Literal, TextIO

import numpy as np

__all__ = [
    "DenseBipartiteGraph",
    "SparseBipartiteGraph",
    "EdgeListError",
    "generate_uniform",
    "read_edge_list",
    "write_edge_list",
    "densify",
    "sparsify_all",
]

_MAX_SEED = 2**64


class EdgeListError(ValueError):
    """Malformed edge-list input.  ``line`` is 1-based, or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DenseBipartiteGraph:
    """Complete bipartite graph; ``weights[i, j]`` joins left ``i`` to right ``j``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"weights must be a nonempty square matrix, got shape {w.shape}")
        if not np.all((w >= 0.0) & (w <= 1.0)):
            raise ValueError("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.n * self.n

    def __eq__(self, other):
        if not isinstance(other, DenseBipartiteGraph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SparseBipartiteGraph:
    """Bipartite graph given by parallel arrays ``left``, ``right``, ``weight``."""

    n: int
    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        n = int(self.n)
        left = np.array(self.left, dtype=np.int64, copy=True).ravel()
        right = np.array(self.right, dtype=np.int64, copy=True).ravel()
        weight = np.array(self.weight, dtype=np.float64, copy=True).ravel()
        if not (left.shape == right.shape == weight.shape):
            raise ValueError("left, right and weight must have equal length")
        if left.size:
            if left.min() < 0 or left.max() >= n or right.min() < 0 or right.max() >= n:
                raise ValueError(f"node index out of range [0, {n})")
            if not np.all((weight >= 0.0) & (weight <= 1.0)):
                raise ValueError("weights must lie in [0, 1]")
            if np.unique(left * n + right).size != left.size:
                raise ValueError("duplicate (left, right) edge")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "left", _readonly(left))
        object.__setattr__(self, "right", _readonly(right))
        object.__setattr__(self, "weight", _readonly(weight))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> SparseBipartiteGraph:
        edges = list(edges)
        if not edges:
            return cls(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        left, right, weight = zip(*edges)
        return cls(n, left, right, weight)

    @property
    def m(self) -> int:
        return int(self.left.size)

    @property
    def edges(self) -> Iterator[tuple[int, int, float]]:
        for i, j, w in zip(self.left.tolist(), self.right.tolist(), self.weight.tolist()):
            yield i, j, w

    def edge_keys(self) -> np.ndarray:
        """Edges encoded as ``left * n + right``, in storage order."""
        return self.left * self.n + self.right

    def canonical(self) -> SparseBipartiteGraph:
        """Same graph with edges sorted by (left, right)."""
        order = np.argsort(self.edge_keys(), kind="stable")
        return SparseBipartiteGraph(self.n, self.left[order], self.right[order], self.weight[order])

    def __eq__(self, other):
        if not isinstance(other, SparseBipartiteGraph):
            return NotImplemented
        if self.n != other.n or self.m != other.m:
            return False
        a, b = self.canonical(), other.canonical()
        return (np.array_equal(a.left, b.left) and np.array_equal(a.right, b.right)
                and np.array_equal(a.weight, b.weight))

    __hash__ = None


def generate_uniform(n: int, seed: int) -> DenseBipartiteGraph:
    """Complete ``n x n`` graph with i.i.d. uniform weights in [0, 1).

    Deterministic in ``(n, seed)`` for a given numpy version (PCG64).
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    rng = np.random.default_rng(seed)
    return DenseBipartiteGraph(rng.random((n, n)))


def sparsify_all(g: DenseBipartiteGraph) -> SparseBipartiteGraph:
    """All ``n**2`` edges of ``g`` as a sparse graph, in row-major order."""
    n = g.n
    left, right = np.divmod(np.arange(n * n, dtype=np.int64), n)
    return SparseBipartiteGraph(n, left, right, g.weights.ravel())


def densify(
    g: SparseBipartiteGraph,
    missing_weight_policy: Literal["reject", "zero"] = "reject",
) -> DenseBipartiteGraph:
    """Weight matrix of ``g``.  Missing edges raise under ``"reject"``, become 0 under ``"zero"``."""
    if missing_weight_policy not in ("reject", "zero"):
        raise ValueError(f"unknown missing_weight_policy {missing_weight_policy!r}")
    if missing_weight_policy == "reject" and g.m != g.n * g.n:
        raise ValueError(f"graph has {g.m} of {g.n * g.n} edges; cannot densify with policy 'reject'")
    w = np.zeros((g.n, g.n))
    w[g.left, g.right] = g.weight
    return DenseBipartiteGraph(w)


def write_edge_list(g: SparseBipartiteGraph, stream: TextIO | None = None) -> str:
    """Canonical text form of ``g``: header, then edges sorted by (left, right).

    Weights are printed with 17 significant digits so that reading the text back
    reproduces every float exactly.  Returns the text; also writes it to
    ``stream`` when one is given.
    """
    c = g.canonical()
    buf = io.StringIO()
    buf.write(f"{c.n} {c.m}\n")
    for i, j, w in c.edges:
        buf.write(f"{i} {j} {w:.17g}\n")
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def _int_field(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise EdgeListError(f"{what} {tok!r} is not an integer", lineno) from None


def read_edge_list(stream: TextIO | str) -> SparseBipartiteGraph:
    """Parse the edge-list text format.

    ``stream`` may be a text stream or the text itself.  Lines starting with
    ``#`` and blank lines are skipped.  Errors carry the offending line number.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    header = None
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int, float]] = []
    n = declared = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if header is None:
            if len(toks) != 2:
                raise EdgeListError("header must be '<n> <edge_count>'", lineno)
            n = _int_field(toks[0], "n", lineno)
            declared = _int_field(toks[1], "edge count", lineno)
            if n < 1:
                raise EdgeListError(f"n must be positive, got {n}", lineno)
            if not 0 <= declared <= n * n:
                raise EdgeListError(f"edge count {declared} outside [0, {n * n}]", lineno)
            header = lineno
            continue
        if len(toks) != 3:
            raise EdgeListError("edge line must be '<left> <right> <weight>'", lineno)
        i = _int_field(toks[0], "left index", lineno)
        j = _int_field(toks[1], "right index", lineno)
        try:
            w = float(toks[2])
        except ValueError:
            raise EdgeListError(f"weight {toks[2]!r} is not a number", lineno) from None
        if not (0 <= i < n and 0 <= j < n):
            raise EdgeListError(f"index out of range: ({i}, {j}) with n = {n}", lineno)
        if not 0.0 <= w <= 1.0:
            raise EdgeListError(f"weight {w!r} outside [0, 1]", lineno)
        if (i, j) in seen:
            raise EdgeListError(f"duplicate edge ({i}, {j})", lineno)
        seen.add((i, j))
        edges.append((i, j, w))

    if header is None:
        raise EdgeListError("missing header")
    if len(edges) != declared:
        raise EdgeListError(f"header declares {declared} edges, found {len(edges)}", header)
    return SparseBipartiteGraph.from_edges(n, edges)
