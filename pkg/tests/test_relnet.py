import random
from fractions import Fraction

import pytest

from cellcount.exact import brute_force_count
from cellcount.relnet import (Edge, GraphError, ReliabilityGraph, brute_force_unreliability, disconnecting_subsets,
                              encode_disconnection, estimate_all_pairs, estimate_unreliability,
                              expand_weighted_edges, gadget_edges, monte_carlo_unreliability, parse_graph)


def test_parse_graph():
    g = parse_graph("c demo\np graph 3 2\ne 1 2\ne 2 3 3 2\n")
    assert g.num_nodes == 3 and g.edges[1] == Edge(2, 3, 3, 2)
    assert g.edges[0].probability == Fraction(1, 2)


@pytest.mark.parametrize("text", [
    "e 1 2\n",
    "p graph 2 2\ne 1 2\n",
    "p graph 2 1\ne 1 3\n",
    "p graph 2 1\ne 1 2 2 2\n",
    "p graph 2 1\ne 1 2 5 2\n",
    "p graph 2 1\nq 1 2\n",
    "p graph 2 1\ne 1 x\n",
])
def test_parse_errors(text):
    with pytest.raises(GraphError):
        parse_graph(text)


@pytest.mark.parametrize("k,m", [(1, 1), (1, 3), (3, 2), (5, 3), (7, 3), (11, 4), (13, 5)])
def test_gadget_has_k_connecting_subsets(k, m):
    edges, nxt = gadget_edges(k, m, 1, 2, 3)
    g = ReliabilityGraph(nxt - 1, tuple(edges))
    assert len(edges) == m
    assert 2 ** m - disconnecting_subsets(g, 1, 2) == k


def test_expansion_preserves_unreliability():
    g = ReliabilityGraph(3, (Edge(1, 2, 3, 2), Edge(2, 3, 5, 3), Edge(1, 3, 1, 2)))
    ex = expand_weighted_edges(g)
    assert ex.total_bits == 7 and len(ex.graph.edges) == 7
    assert Fraction(disconnecting_subsets(ex.graph, 1, 3), 2 ** 7) == brute_force_unreliability(g, 1, 3)


def test_encoding_counts_disconnecting_subsets():
    rng = random.Random(41)
    for _ in range(30):
        n = rng.randint(2, 5)
        edges = [Edge(*rng.sample(range(1, n + 1), 2)) for _ in range(rng.randint(1, 7))]
        directed = rng.random() < 0.3
        g = ReliabilityGraph(n, tuple(edges), directed)
        inst = encode_disconnection(g, 1, n)
        assert brute_force_count(inst.formula, inst.sampling_set) == disconnecting_subsets(g, 1, n)


def test_series_and_parallel_values():
    series = ReliabilityGraph(3, (Edge(1, 2), Edge(2, 3)))
    parallel = ReliabilityGraph(2, (Edge(1, 2), Edge(1, 2)))
    assert brute_force_unreliability(series, 1, 3) == Fraction(3, 4)
    assert brute_force_unreliability(parallel, 1, 2) == Fraction(1, 4)
    assert estimate_unreliability(series, 1, 3, seed=0).unreliability == Fraction(3, 4)


def test_directed_edge_is_one_way():
    g = ReliabilityGraph(2, (Edge(2, 1),), directed=True)
    assert brute_force_unreliability(g, 1, 2) == 1
    assert estimate_unreliability(g, 1, 2, seed=0).unreliability == 1


def test_no_edges_and_bad_terminals():
    g = ReliabilityGraph(2, ())
    assert estimate_unreliability(g, 1, 2).unreliability == 1
    with pytest.raises(GraphError):
        estimate_unreliability(g, 1, 1)
    with pytest.raises(GraphError):
        estimate_unreliability(g, 1, 3)


def test_monte_carlo_oracle_agrees():
    g = ReliabilityGraph(4, (Edge(1, 2, 3, 2), Edge(2, 4), Edge(1, 3), Edge(3, 4, 1, 2), Edge(2, 3)))
    exact = float(brute_force_unreliability(g, 1, 4))
    mc = monte_carlo_unreliability(g, 1, 4, 40000, seed=3)
    assert abs(mc - exact) < 4 * (exact * (1 - exact) / 40000) ** 0.5 + 1e-9


def test_all_pairs_rows_and_seeds():
    g = ReliabilityGraph(3, (Edge(1, 2), Edge(2, 3)))
    rows = estimate_all_pairs(g, seed=5)
    assert [(r["u"], r["v"]) for r in rows] == [(1, 2), (1, 3), (2, 3)]
    assert rows == estimate_all_pairs(g, seed=5)
    assert rows[1]["r_exact"] == "3/4"
