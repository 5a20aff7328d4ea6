from __future__ import annotations

import statistics
from collections import Counter

import pandas as pd
import pytest
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from scg_jit.artifacts import provenance
from scg_jit.graph_metrics import FEATURE_NAMES
from scg_jit.graph_metrics import GraphFeatureVector
from scg_jit.graph_metrics import compute_metrics
from scg_jit.graph_metrics import count_simple_cycles
from scg_jit.graph_metrics import write_feature_csv
from scg_jit.scg import SourceCodeGraph


def make_graph(nodes, edges):
    return SourceCodeGraph(frozenset(nodes), Counter(edges))


def complete_digraph(k):
    nodes = [f"n{i}" for i in range(k)]
    return make_graph(nodes, {(a, b): 1 for a in nodes for b in nodes if a != b})


def brute_force_cycles(nodes, edges):
    """Simple cycles of length >= 2, each counted once from its smallest vertex."""
    succ = {v: sorted({d for s, d in edges if s == v and d != v}) for v in nodes}
    count = 0

    def extend(start, current, visited):
        nonlocal count
        for nxt in succ[current]:
            if nxt == start and len(visited) >= 2:
                count += 1
            elif nxt > start and nxt not in visited:
                extend(start, nxt, visited | {nxt})

    for start in sorted(nodes):
        extend(start, start, {start})
    return count


def brute_force_metrics(nodes, edges):
    nodes = sorted(nodes)
    n = len(nodes)
    if n == 0:
        return GraphFeatureVector()
    degree = {v: 0 for v in nodes}
    for (s, d), mult in edges.items():
        degree[s] += mult
        degree[d] += mult
    degrees = sorted(degree.values())
    e = sum(edges.values())
    distinct = len([1 for s, d in edges if s != d])
    return GraphFeatureVector(
        num_cycles=brute_force_cycles(nodes, edges),
        density=distinct / (n * (n - 1)) if n > 1 else 0.0,
        num_nodes=n,
        num_edges=e,
        avg_in_degree=e / n,
        avg_out_degree=e / n,
        max_degree=max(degrees),
        min_degree=min(degrees),
        sum_degree=sum(degrees),
        avg_degree=sum(degrees) / n,
        median_degree=float(statistics.median(degrees)),
        num_self_loops=sum(m for (s, d), m in edges.items() if s == d),
    )


@st.composite
def multigraphs(draw, max_nodes=8):
    n = draw(st.integers(0, max_nodes))
    nodes = [f"v{i}" for i in range(n)]
    if not nodes:
        return nodes, {}
    pairs = draw(
        st.lists(st.tuples(st.sampled_from(nodes), st.sampled_from(nodes), st.integers(1, 3)), max_size=3 * n)
    )
    edges = Counter()
    for s, d, m in pairs:
        edges[s, d] += m
    return nodes, dict(edges)


def test_empty_graph():
    result = compute_metrics(make_graph([], {}))
    assert result.vector == GraphFeatureVector()
    assert all(v == 0 for v in result.vector.as_tuple())
    assert not result.cycle_cap_hit


def test_complete_digraph_on_three_nodes():
    v = compute_metrics(complete_digraph(3)).vector
    assert v.density == 1.0
    assert v.num_edges == 6
    assert v.sum_degree == 12
    assert v.avg_degree == 4.0
    assert v.median_degree == 4.0
    assert v.num_cycles == 5
    assert v.num_self_loops == 0


def test_multi_edge_with_self_loop():
    v = compute_metrics(make_graph(["A", "B"], {("A", "B"): 3, ("B", "B"): 1})).vector
    assert v.num_nodes == 2
    assert v.num_edges == 4
    assert v.sum_degree == 8
    assert v.num_self_loops == 1
    assert v.density == 0.5
    assert v.max_degree == 5
    assert v.min_degree == 3
    assert v.median_degree == 4.0
    assert v.num_cycles == 0


@pytest.mark.parametrize(
    ("g", "expected"),
    [
        (make_graph(["a", "b", "c"], {("a", "b"): 1, ("a", "c"): 2}), 0),
        (make_graph(["a", "b"], {("a", "b"): 1, ("b", "a"): 1}), 1),
        (complete_digraph(4), 20),
        (make_graph(["a"], {("a", "a"): 4}), 0),
    ],
)
def test_count_simple_cycles(g, expected):
    assert count_simple_cycles(g) == (expected, False)


def test_cycle_cap():
    assert count_simple_cycles(complete_digraph(4), cap=7) == (7, True)
    result = compute_metrics(complete_digraph(9))
    assert result.cycle_cap_hit
    assert result.vector.num_cycles == 100_000


@given(multigraphs())
@settings(deadline=None, max_examples=200)
def test_matches_brute_force(graph):
    nodes, edges = graph
    assert compute_metrics(make_graph(nodes, edges)).vector == brute_force_metrics(nodes, edges)


@given(multigraphs(max_nodes=12))
@settings(deadline=None, max_examples=500)
def test_degree_identities(graph):
    nodes, edges = graph
    v = compute_metrics(make_graph(nodes, edges)).vector
    assert v.sum_degree == 2 * v.num_edges
    assert v.avg_in_degree == v.avg_out_degree
    assert 0.0 <= v.density <= 1.0
    if v.num_nodes:
        assert v.min_degree <= v.median_degree <= v.max_degree


@given(multigraphs(), st.randoms(use_true_random=False))
@settings(deadline=None)
def test_relabeling_invariance(graph, random):
    nodes, edges = graph
    shuffled = list(nodes)
    random.shuffle(shuffled)
    rename = {old: f"w{new}" for old, new in zip(nodes, shuffled)}
    relabeled = {(rename[s], rename[d]): m for (s, d), m in edges.items()}
    assert (
        compute_metrics(make_graph(rename.values(), relabeled)).vector
        == compute_metrics(make_graph(nodes, edges)).vector
    )


def test_feature_csv(tmp_path):
    rows = [
        ("c1", compute_metrics(complete_digraph(3)).vector),
        ("c2", GraphFeatureVector()),
    ]
    path = tmp_path / "features_A.csv"
    assert write_feature_csv(provenance(0), rows, path) == 2

    text = path.read_text()
    assert text.startswith("# {")
    frame = pd.read_csv(path, comment="#")
    assert list(frame.columns) == ["commit_id"] + [f"f{i}" for i in range(1, 13)]
    assert frame.loc[0, "f1"] == 5
    assert frame.loc[0, f"f{FEATURE_NAMES.index('sum_degree') + 1}"] == 12
    assert (frame.iloc[1, 1:] == 0).all()
