import math

import numpy as np
import pytest

from app.core.acyclic import (
    acyclic_fix,
    acyclic_fix_report,
    cut_priorities,
    npl,
    prefix_cuts,
    priority_topological_order,
)
from app.core.errors import GraphInputError, NotAcyclicError, PrecedenceError
from app.core.graph import BiPartition, build_graph, cut_counts, is_acyclic_bipartition, orient_forward
from app.core.spectral import solve_fiedler
from app.models.schemas import AcyclicFixConfig, PriorityMode
from tests.factories import _make_connected_dag, _make_path, _make_random_dag


def _make_random_partition(g, seed: int) -> BiPartition:
    rng = np.random.default_rng(seed)
    in_t = rng.random(g.n) < 0.5
    in_t[0], in_t[-1] = False, True
    return orient_forward(g, BiPartition(in_t=in_t))


# --- Building blocks ---

def test_priority_order_pops_smallest_key():
    g = build_graph(4, [])
    assert priority_topological_order(g, range(4), key=lambda v: -v) == [3, 2, 1, 0]


def test_priority_order_respects_edges():
    g = build_graph(3, [(2, 0)])
    assert priority_topological_order(g, range(3), key=lambda v: v) == [1, 2, 0]


def test_priority_order_ignores_parents_outside_members():
    g = build_graph(3, [(0, 1), (1, 2)])
    assert priority_topological_order(g, [1, 2], key=lambda v: 0) == [1, 2]


def test_priority_order_detects_cycles():
    g = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    with pytest.raises(NotAcyclicError):
        priority_topological_order(g, range(3), key=lambda v: v)


def test_cut_priorities():
    g = build_graph(3, [(0, 1), (1, 2)])
    p = BiPartition.from_sets(3, [0, 2], [1])
    # 0->1 is a forward cut, 1->2 a backward one
    assert cut_priorities(g, p).tolist() == [1, -2, 1]


def test_prefix_cuts():
    g = build_graph(3, [(0, 1), (0, 2), (1, 2)])
    assert prefix_cuts(g, [0, 1, 2]).tolist() == [0, 2, 2, 0]


# --- acyclic_fix ---

def test_fix_on_alternating_path():
    g = _make_path(4)
    p = BiPartition.from_sets(4, [0, 2], [1, 3])
    fixed = acyclic_fix(g, p)
    assert fixed.s_vertices() == [0, 1]
    assert fixed.t_vertices() == [2, 3]
    assert npl(p, fixed) == 0.5


def test_fix_output_is_acyclic_on_random_dags():
    for seed in range(10):
        g = _make_random_dag(50, 0.1, seed=seed)
        p = _make_random_partition(g, seed)
        cfg = AcyclicFixConfig(beta=0.2)
        fixed = acyclic_fix(g, p, cfg)
        assert fixed.n == g.n
        assert is_acyclic_bipartition(g, fixed)
        floor_s = math.ceil(min(p.s_size, cfg.beta * g.n))
        floor_t = math.ceil(min(p.t_size, cfg.beta * g.n))
        assert fixed.s_size >= floor_s
        assert fixed.t_size >= floor_t


def test_fix_is_deterministic():
    g = _make_random_dag(40, 0.15, seed=11)
    p = _make_random_partition(g, 11)
    assert acyclic_fix(g, p).in_t.tolist() == acyclic_fix(g, p).in_t.tolist()


def test_fix_rejects_backward_majority():
    g = _make_path(2)
    with pytest.raises(PrecedenceError):
        acyclic_fix(g, BiPartition.from_sets(2, [1], [0]))


def test_fix_rejects_cycles():
    g = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    with pytest.raises(NotAcyclicError):
        acyclic_fix(g, BiPartition.from_sets(3, [0], [1, 2]))


def test_fix_rejects_size_mismatch():
    with pytest.raises(GraphInputError):
        acyclic_fix(_make_path(3), BiPartition.from_sets(2, [0], [1]))


def test_spectral_priority_needs_vector():
    g = _make_path(4)
    p = BiPartition.from_sets(4, [0, 1], [2, 3])
    with pytest.raises(GraphInputError):
        acyclic_fix(g, p, AcyclicFixConfig(priority=PriorityMode.spectral))


@pytest.mark.parametrize("mode", [PriorityMode.spectral, PriorityMode.spectral_binned])
def test_spectral_priority_modes_produce_acyclic_partitions(mode):
    g = _make_connected_dag(40, 0.12, seed=2)
    x = solve_fiedler(g).x
    p = orient_forward(g, BiPartition(in_t=~(x > 0)))
    fixed = acyclic_fix(g, p, AcyclicFixConfig(priority=mode, spectral_bins=4), x)
    assert is_acyclic_bipartition(g, fixed)


def test_beta_must_lie_in_open_unit_interval():
    with pytest.raises(ValueError):
        AcyclicFixConfig(beta=0.0)
    with pytest.raises(ValueError):
        AcyclicFixConfig(beta=1.0)


# --- NPL and report ---

def test_npl_of_identical_partitions():
    p = BiPartition.from_sets(3, [0], [1, 2])
    assert npl(p, p) == 1.0
    assert npl(p, p.swapped()) == 0.0


def test_npl_on_empty_partition():
    empty = BiPartition(in_t=np.zeros(0, dtype=bool))
    assert npl(empty, empty) == 1.0


def test_report_on_already_acyclic_partition():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    p = BiPartition.from_sets(4, [0, 1], [2, 3])
    fixed, report = acyclic_fix_report(g, p)
    assert report.already_acyclic is True
    assert fixed.in_t.tolist() == p.in_t.tolist()
    assert report.npl == 1.0
    assert report.after == report.before
    assert cut_counts(g, fixed) == (2, 0)
