import networkx as nx
import numpy as np
import pytest

from app.core.errors import GraphInputError, OrderValidationError
from app.core.graph import (
    BiPartition,
    TopologicalOrder,
    build_graph,
    cut_counts,
    degree_difference_vector,
    induced_subgraph,
    is_acyclic,
    is_acyclic_bipartition,
    is_weakly_connected,
    kahn_order,
    largest_weakly_connected_component,
    orient_forward,
    require_valid_order,
    validate_toporder,
    weakly_connected_components,
)
from app.models.schemas import Part
from tests.factories import _make_path, _make_random_dag, _to_networkx


# --- build_graph ---

def test_self_loops_and_duplicates_dropped():
    g = build_graph(3, [(0, 1), (0, 1), (1, 1), (1, 2)])
    assert g.edges == [(0, 1), (1, 2)]
    assert g.dropped_self_loops == 1
    assert g.dropped_duplicates == 1


def test_adjacency_and_degrees():
    g = build_graph(4, [(2, 0), (0, 3), (1, 3), (0, 1)])
    assert g.out_adj[0] == (1, 3)
    assert g.in_adj[3] == (0, 1)
    assert g.out_deg.tolist() == [2, 1, 1, 0]
    assert g.in_deg.tolist() == [1, 1, 0, 2]
    assert g.num_edges == 4


def test_endpoint_out_of_range_rejected():
    with pytest.raises(GraphInputError):
        build_graph(2, [(0, 2)])


def test_negative_vertex_count_rejected():
    with pytest.raises(GraphInputError):
        build_graph(-1, [])


def test_label_count_must_match():
    with pytest.raises(GraphInputError):
        build_graph(2, [(0, 1)], labels=["a"])


def test_empty_graph():
    g = build_graph(0, [])
    assert g.n == 0
    assert g.num_edges == 0
    assert weakly_connected_components(g) == []


# --- Components ---

def test_weak_components_ordered_by_smallest_vertex():
    g = build_graph(5, [(1, 0), (4, 3)])
    assert weakly_connected_components(g) == [[0, 1], [2], [3, 4]]
    assert not is_weakly_connected(g)


def test_direction_ignored_for_connectivity():
    g = build_graph(3, [(0, 1), (2, 1)])
    assert is_weakly_connected(g)


def test_many_components_keep_ascending_members():
    g = build_graph(300, [(2 * k + 1, 2 * k) for k in range(100)])
    components = weakly_connected_components(g)
    assert len(components) == 200
    assert components[:2] == [[0, 1], [2, 3]]
    assert components[-1] == [299]


def test_components_agree_with_networkx():
    for seed in range(5):
        g = _make_random_dag(40, 0.03, seed=seed)
        expected = sorted(sorted(c) for c in nx.weakly_connected_components(_to_networkx(g)))
        assert weakly_connected_components(g) == expected


def test_largest_component_ties_go_to_earliest():
    g = build_graph(5, [(1, 0), (3, 4)])
    sub, keep = largest_weakly_connected_component(g)
    assert keep.tolist() == [0, 1]
    assert sub.edges == [(1, 0)]


def test_induced_subgraph_relabels_in_ascending_order():
    g = build_graph(4, [(0, 2), (2, 3), (1, 3)], labels=["a", "b", "c", "d"])
    sub, keep = induced_subgraph(g, [3, 2, 0])
    assert keep.tolist() == [0, 2, 3]
    assert sub.edges == [(0, 1), (1, 2)]
    assert sub.labels == ("a", "c", "d")


# --- Acyclicity ---

def test_kahn_order_prefers_smallest_id():
    g = build_graph(3, [(2, 0)])
    assert kahn_order(g) == [1, 2, 0]


def test_cycle_detected():
    assert not is_acyclic(build_graph(3, [(0, 1), (1, 2), (2, 0)]))
    assert is_acyclic(_make_path(5))


def test_acyclicity_agrees_with_networkx():
    rng = np.random.default_rng(11)
    for seed in range(20):
        g = _make_random_dag(15, 0.2, seed=seed)
        u, v = (int(a) for a in rng.integers(0, 15, size=2))
        if u != v:
            g = build_graph(g.n, [*g.edges, (u, v)])
        assert is_acyclic(g) == nx.is_directed_acyclic_graph(_to_networkx(g))


def test_degree_difference_matches_edge_sum():
    g = _make_random_dag(30, 0.2, seed=3)
    x = np.random.default_rng(0).standard_normal(g.n)
    expected = sum(x[u] - x[v] for u, v in g.edges)
    assert degree_difference_vector(g) @ x == pytest.approx(expected)


# --- TopologicalOrder ---

def test_order_and_positions_are_inverse():
    order = TopologicalOrder.from_sequence([2, 0, 1])
    assert order.sigma.tolist() == [1, 2, 0]
    again = TopologicalOrder.from_positions(order.sigma)
    assert again.tolist() == [2, 0, 1]
    assert len(order) == 3


def test_non_permutation_rejected():
    with pytest.raises(OrderValidationError):
        TopologicalOrder.from_sequence([0, 0, 1])
    with pytest.raises(OrderValidationError):
        TopologicalOrder.from_positions([0, 3, 1])


def test_validate_toporder():
    g = _make_path(3)
    assert validate_toporder(g, TopologicalOrder.from_sequence([0, 1, 2]))
    assert not validate_toporder(g, TopologicalOrder.from_sequence([1, 0, 2]))
    assert not validate_toporder(g, TopologicalOrder.from_sequence([0, 1]))
    with pytest.raises(OrderValidationError):
        require_valid_order(g, TopologicalOrder.from_sequence([2, 1, 0]))


# --- BiPartition ---

def test_partition_from_sets_and_labels():
    p = BiPartition.from_sets(4, [0, 2], [1, 3])
    assert p.s_vertices() == [0, 2]
    assert p.t_vertices() == [1, 3]
    assert p.labels() == [Part.S, Part.T, Part.S, Part.T]
    assert BiPartition.from_labels(["S", "T", "S", "T"]).in_t.tolist() == p.in_t.tolist()
    assert (p.s_size, p.t_size) == (2, 2)


def test_overlapping_sets_rejected():
    with pytest.raises(GraphInputError):
        BiPartition.from_sets(3, [0, 1], [1, 2])


def test_cut_counts_and_orientation():
    g = build_graph(4, [(0, 1), (1, 2), (3, 0), (3, 2)])
    p = BiPartition.from_sets(4, [0, 1], [2, 3])
    assert cut_counts(g, p) == (1, 1)
    q = BiPartition.from_sets(4, [2, 3], [0, 1])
    assert cut_counts(g, q) == (1, 1)
    backwards = BiPartition.from_sets(4, [1, 2], [0, 3])
    # 0->1 and 3->2 run T -> S, 1->2 stays inside S
    assert cut_counts(g, backwards) == (0, 2)
    oriented = orient_forward(g, backwards)
    assert oriented.s_vertices() == [0, 3]
    assert is_acyclic_bipartition(g, oriented)
