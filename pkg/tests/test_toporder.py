import logging

import pytest

from app.core.errors import NotAcyclicError, PrecedenceError
from app.core.graph import build_graph, validate_toporder
from app.core.toporder import VertexPrecedenceList, direction_fix, spectral_toporder
from app.models.schemas import SpectralConfig
from tests.factories import _make_barbell_dag, _make_connected_dag, _make_path, _make_random_dag


# --- VertexPrecedenceList ---

def test_initial_list_holds_all_vertices():
    vpl = VertexPrecedenceList.initial(4)
    assert vpl.sets == [[0, 1, 2, 3]]
    assert VertexPrecedenceList.initial(0).sets == []


def test_refine_replaces_set_in_place():
    vpl = VertexPrecedenceList(sets=[[0], [1, 2, 3], [4]])
    vpl.refine(1, [1], [2, 3])
    assert vpl.sets == [[0], [1], [2, 3], [4]]
    vpl.refine(2, [2, 3], [])
    assert vpl.sets == [[0], [1], [2, 3], [4]]


def test_validate_accepts_forward_sets():
    g = _make_path(4)
    VertexPrecedenceList(sets=[[0, 1], [2], [3]]).validate(g)


def test_validate_rejects_backward_edge():
    g = _make_path(3)
    with pytest.raises(PrecedenceError):
        VertexPrecedenceList(sets=[[1], [0, 2]]).validate(g)


def test_validate_rejects_missing_and_overlapping_vertices():
    g = _make_path(3)
    with pytest.raises(PrecedenceError):
        VertexPrecedenceList(sets=[[0], [1]]).validate(g)
    with pytest.raises(PrecedenceError):
        VertexPrecedenceList(sets=[[0, 1], [1, 2]]).validate(g)
    with pytest.raises(PrecedenceError):
        VertexPrecedenceList(sets=[[0, 1, 2], []]).validate(g)


def test_to_order_concatenates_sets():
    assert VertexPrecedenceList(sets=[[2], [0, 1]]).to_order().tolist() == [2, 0, 1]


# --- direction_fix ---

def _make_fix_instance():
    g = build_graph(6, [(0, 1), (1, 2), (3, 4), (2, 5), (4, 5), (0, 3)])
    return g, [0], [1, 2, 3, 4], [5]


def test_direction_fix_preserves_cardinalities_and_acyclicity():
    g, K, L, M = _make_fix_instance()
    s_fixed, t_fixed = direction_fix(g, K, L, M, S=[1, 4], T=[2, 3])
    assert len(s_fixed) == 2
    assert len(t_fixed) == 2
    assert sorted(s_fixed + t_fixed) == L
    t_set = set(t_fixed)
    assert not any(u in t_set and v in s_fixed for u, v in g.edges)


def test_direction_fix_keeps_acyclic_split():
    g, K, L, M = _make_fix_instance()
    s_fixed, t_fixed = direction_fix(g, K, L, M, S=[1, 3], T=[2, 4])
    assert sorted(s_fixed) == [1, 3]
    assert sorted(t_fixed) == [2, 4]


def test_direction_fix_rejects_precedence_violation():
    g, _, L, _ = _make_fix_instance()
    with pytest.raises(PrecedenceError):
        direction_fix(g, [5], L, [0], S=[1, 3], T=[2, 4])


def test_direction_fix_rejects_bad_split():
    g, K, L, M = _make_fix_instance()
    with pytest.raises(PrecedenceError):
        direction_fix(g, K, L, M, S=[1], T=[2, 3])


def test_direction_fix_splits_path_by_cardinality():
    g = _make_path(3)
    s_fixed, t_fixed = direction_fix(g, [], [0, 1, 2], [], S=[0, 2], T=[1])
    assert s_fixed == [0, 1]
    assert t_fixed == [2]


def test_direction_fix_keeps_order_ideal():
    g = build_graph(4, [(0, 2), (1, 3)])
    s_fixed, t_fixed = direction_fix(g, [], [0, 1, 2, 3], [], S=[0, 1], T=[2, 3])
    assert s_fixed == [0, 1]
    assert t_fixed == [2, 3]


def test_edges_into_later_sets_push_a_vertex_back():
    # 0 has three edges into M, so 1 is popped ahead of it
    g = build_graph(6, [(0, 3), (0, 4), (0, 5)])
    s_fixed, t_fixed = direction_fix(g, [], [0, 1, 2], [3, 4, 5], S=[0, 1], T=[2])
    assert s_fixed == [1, 0]
    assert t_fixed == [2]
    without_m = direction_fix(build_graph(3, []), [], [0, 1, 2], [], S=[0, 1], T=[2])
    assert without_m[0] == [0, 1]


def test_edges_from_earlier_sets_pull_a_vertex_forward():
    g = build_graph(4, [(0, 3)])
    s_fixed, t_fixed = direction_fix(g, [0], [1, 2, 3], [], S=[1, 2], T=[3])
    assert s_fixed == [1, 2]
    assert t_fixed == [3]
    s_fixed, _ = direction_fix(g, [0], [1, 2, 3], [], S=[1, 2, 3], T=[])
    assert s_fixed == [3, 1, 2]


# --- spectral_toporder ---

def test_order_is_valid_on_random_dags():
    for seed in range(4):
        g = _make_random_dag(60, 0.08, seed=seed)
        order = spectral_toporder(g, SpectralConfig(seed=seed))
        assert validate_toporder(g, order)


def test_path_has_a_single_order():
    g = _make_path(9)
    assert spectral_toporder(g).tolist() == list(range(9))


def test_tiny_graphs():
    assert spectral_toporder(build_graph(0, [])).tolist() == []
    assert spectral_toporder(build_graph(1, [])).tolist() == [0]
    assert spectral_toporder(build_graph(3, [(2, 0)])).tolist() in ([1, 2, 0], [2, 0, 1])


def test_disconnected_dag_is_ordered():
    g = build_graph(8, [(0, 1), (1, 2), (4, 5), (6, 7)])
    assert validate_toporder(g, spectral_toporder(g))


def test_result_independent_of_thread_count():
    g = _make_connected_dag(80, 0.06, seed=9)
    cfg = SpectralConfig(seed=5)
    single = spectral_toporder(g, cfg, threads=1)
    parallel = spectral_toporder(g, cfg, threads=4)
    assert single.tolist() == parallel.tolist()


def test_same_seed_same_order():
    g = _make_connected_dag(50, 0.1, seed=10)
    assert spectral_toporder(g, SpectralConfig(seed=1)).tolist() == spectral_toporder(g, SpectralConfig(seed=1)).tolist()


def test_classic_coefficient_order_is_valid():
    g = _make_connected_dag(50, 0.1, seed=12)
    assert validate_toporder(g, spectral_toporder(g, SpectralConfig(c=0.0)))


def test_iterative_subproblems_give_valid_order():
    g = _make_connected_dag(90, 0.05, seed=13)
    order = spectral_toporder(g, SpectralConfig(small_threshold=16, seed=2))
    assert validate_toporder(g, order)


def test_cyclic_graph_rejected():
    with pytest.raises(NotAcyclicError):
        spectral_toporder(build_graph(3, [(0, 1), (1, 2), (2, 0)]))


def test_diamond_keeps_source_first_and_sink_last():
    g = build_graph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    order = spectral_toporder(g).tolist()
    assert order[0] == 0
    assert order[-1] == 3


def test_clique_chain_blocks_stay_in_order():
    g = _make_barbell_dag(6)
    order = spectral_toporder(g).tolist()
    assert sorted(order[:6]) == list(range(6))
    assert sorted(order[6:]) == list(range(6, 12))


def test_crashing_subproblem_solve_falls_back(monkeypatch, caplog):
    def crash(*args, **kwargs):
        raise RuntimeError("solver blew up")

    monkeypatch.setattr("app.core.toporder.solve_restricted", crash)
    g = _make_connected_dag(30, 0.15, seed=14)
    with caplog.at_level(logging.WARNING, logger="app.core.toporder"):
        order = spectral_toporder(g)
    assert validate_toporder(g, order)
    assert "crashed" in caplog.text
    assert "fallback splits" in caplog.text
