import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsematch.graph import (
    DenseBipartiteGraph,
    EdgeListError,
    SparseBipartiteGraph,
    densify,
    generate_uniform,
    read_edge_list,
    sparsify_all,
    write_edge_list,
)


def test_generate_single_node():
    g = generate_uniform(1, 123)
    assert g.n == 1 and g.m == 1
    assert 0.0 <= g.weights[0, 0] <= 1.0


def test_generate_is_deterministic():
    assert generate_uniform(5, 42) == generate_uniform(5, 42)
    assert generate_uniform(5, 42) != generate_uniform(5, 43)


def test_generate_rejects_bad_input():
    with pytest.raises(ValueError):
        generate_uniform(0, 1)
    with pytest.raises(ValueError):
        generate_uniform(3, -1)
    with pytest.raises(ValueError):
        generate_uniform(3, 2**64)


def test_generate_mean_concentrates():
    n = 1000
    # standard error of a mean of n**2 uniforms is 1 / sqrt(12 n**2) ~ 2.9e-4,
    # so +-0.003 is over 10 standard errors
    se = 1.0 / math.sqrt(12.0 * n * n)
    assert 0.003 / se > 10
    inside = sum(0.497 <= generate_uniform(n, seed).weights.mean() <= 0.503 for seed in range(100))
    assert inside >= 95


@pytest.mark.parametrize("seed", range(5))
def test_generated_weights_in_unit_interval(seed):
    w = generate_uniform(50, seed).weights
    assert w.min() >= 0.0 and w.max() <= 1.0


def test_graphs_are_immutable():
    g = generate_uniform(3, 0)
    with pytest.raises(ValueError):
        g.weights[0, 0] = 0.5
    s = sparsify_all(g)
    with pytest.raises(ValueError):
        s.weight[0] = 0.5


@pytest.mark.parametrize("weights", [[[1.5]], [[-0.1]], [[0.1, 0.2]], np.zeros((0, 0))])
def test_dense_rejects_invalid(weights):
    with pytest.raises(ValueError):
        DenseBipartiteGraph(np.array(weights))


def test_sparse_invariants():
    with pytest.raises(ValueError, match="duplicate"):
        SparseBipartiteGraph.from_edges(2, [(0, 1, 0.5), (0, 1, 0.4)])
    with pytest.raises(ValueError, match="range"):
        SparseBipartiteGraph.from_edges(2, [(0, 2, 0.5)])
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        SparseBipartiteGraph.from_edges(2, [(0, 1, 1.5)])
    assert SparseBipartiteGraph.from_edges(3, []).m == 0


def test_read_simple():
    g = read_edge_list("2 1\n0 1 0.5\n")
    assert g.n == 2
    assert list(g.edges) == [(0, 1, 0.5)]


def test_read_skips_comments():
    g = read_edge_list(io.StringIO("# generated\n2 1\n# edge\n0 1 0.5\n"))
    assert list(g.edges) == [(0, 1, 0.5)]


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("2 1\n0 2 0.5\n", 2, "out of range"),
        ("2\n0 1 0.5\n", 1, "header"),
        ("x 1\n0 1 0.5\n", 1, "integer"),
        ("2 2\n0 1 0.5\n0 1 0.25\n", 3, "duplicate"),
        ("2 1\n0 1 1.5\n", 2, "outside"),
        ("2 1\n0 1 abc\n", 2, "number"),
        ("2 1\n0 1\n", 2, "edge line"),
        ("# a\n2 2\n0 1 0.5\n", 2, "declares"),
    ],
)
def test_read_errors_report_line(text, line, fragment):
    with pytest.raises(EdgeListError, match=fragment) as info:
        read_edge_list(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_canonical_text_round_trip():
    text = "3 3\n0 2 0.10000000000000001\n1 0 0.5\n2 2 1\n"
    assert write_edge_list(read_edge_list(text)) == text


def test_write_sorts_edges():
    g = SparseBipartiteGraph.from_edges(2, [(1, 0, 0.25), (0, 1, 0.75)])
    buf = io.StringIO()
    text = write_edge_list(g, buf)
    assert buf.getvalue() == text == "2 2\n0 1 0.75\n1 0 0.25\n"


@st.composite
def sparse_graphs(draw):
    n = draw(st.integers(1, 6))
    keys = draw(st.sets(st.integers(0, n * n - 1), max_size=n * n))
    weights = draw(st.lists(st.floats(0.0, 1.0), min_size=len(keys), max_size=len(keys)))
    return SparseBipartiteGraph.from_edges(n, [(k // n, k % n, w) for k, w in zip(sorted(keys), weights)])


@given(sparse_graphs())
@settings(max_examples=200, deadline=None)
def test_round_trip_is_lossless(g):
    back = read_edge_list(write_edge_list(g))
    assert back == g
    assert np.array_equal(back.weight, g.canonical().weight)


def test_sparsify_all_and_densify():
    g = DenseBipartiteGraph(np.array([[0.1, 0.2], [0.3, 0.4]]))
    s = sparsify_all(g)
    assert s.m == 4
    assert densify(s) == g


@given(st.integers(1, 8), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_densify_round_trip(n, seed):
    g = generate_uniform(n, seed)
    assert densify(sparsify_all(g)) == g


def test_densify_incomplete():
    s = SparseBipartiteGraph.from_edges(2, [(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5)])
    with pytest.raises(ValueError):
        densify(s, "reject")
    assert densify(s, "zero").weights[1, 1] == 0.0
    with pytest.raises(ValueError):
        densify(s, "guess")
