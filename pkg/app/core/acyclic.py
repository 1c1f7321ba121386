"""Acyclic repair of bi-partitions on DAGs and the label-preservation metric."""

import heapq
import logging
import math
from collections.abc import Callable, Hashable, Iterable

import numpy as np

from app.core.bipartition import partition_metrics
from app.core.errors import GraphInputError, NotAcyclicError, PrecedenceError
from app.core.graph import BiPartition, DiGraph, cut_counts, is_acyclic, is_acyclic_bipartition
from app.models.schemas import AcyclicFixConfig, AcyclicReport, PriorityMode

logger = logging.getLogger(__name__)


def priority_topological_order(
    g: DiGraph,
    members: Iterable[int],
    key: Callable[[int], Hashable],
    inside: Callable[[int], bool] | None = None,
) -> list[int]:
    """Topological order of g restricted to `members`, popping the smallest key.

    Readiness only counts parents for which `inside` holds (membership by
    default); the vertex id is appended to every key so equal keys pop in
    ascending id.
    """
    members = list(members)
    if inside is None:
        inside = set(members).__contains__
    waiting: dict[int, int] = {}
    heap: list[tuple[Hashable, int]] = []
    for v in members:
        parents = sum(1 for u in g.in_adj[v] if inside(u))
        waiting[v] = parents
        if parents == 0:
            heap.append((key(v), v))
    heapq.heapify(heap)

    order: list[int] = []
    while heap:
        _, v = heapq.heappop(heap)
        order.append(v)
        for u in g.out_adj[v]:
            if u not in waiting:
                continue
            waiting[u] -= 1
            if waiting[u] == 0:
                heapq.heappush(heap, (key(u), u))
    if len(order) != len(members):
        raise NotAcyclicError("the selected vertices contain a directed cycle")
    return order


def cut_priorities(g: DiGraph, p: BiPartition) -> np.ndarray:
    """+1/-1 per cut-edge endpoint, popped by minimum: a forward cut pushes its source later and pulls its target earlier."""
    src_t = p.in_t[g.src]
    dst_t = p.in_t[g.dst]
    forward = ~src_t & dst_t
    backward = src_t & ~dst_t
    prio = np.zeros(g.n, dtype=np.int64)
    np.add.at(prio, g.src[forward], 1)
    np.add.at(prio, g.dst[forward], -1)
    np.add.at(prio, g.src[backward], -1)
    np.add.at(prio, g.dst[backward], 1)
    return prio


def prefix_cuts(g: DiGraph, order: list[int]) -> np.ndarray:
    """cuts[k] = number of edges from the first k vertices of `order` to the rest."""
    n = g.n
    position = np.empty(n, dtype=np.int64)
    position[np.asarray(order, dtype=np.int64)] = np.arange(n)
    diff = np.zeros(n + 2, dtype=np.int64)
    np.add.at(diff, position[g.src] + 1, 1)
    np.add.at(diff, position[g.dst] + 1, -1)
    return np.cumsum(diff)[: n + 1]


def _primary_keys(
    p: BiPartition,
    cfg: AcyclicFixConfig,
    x: np.ndarray | None,
) -> np.ndarray:
    if cfg.priority == PriorityMode.labels:
        return p.in_t.astype(np.int64)
    if x is None:
        raise GraphInputError(f"priority mode {cfg.priority.value} needs the spectral vector")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise GraphInputError(f"spectral vector has shape {x.shape}, expected ({p.n},)")
    # The forward part should carry the larger values.
    s_mean = x[~p.in_t].mean() if p.s_size else 0.0
    t_mean = x[p.in_t].mean() if p.t_size else 0.0
    if s_mean < t_mean:
        x = -x
    if cfg.priority == PriorityMode.spectral:
        return -x
    ranks = np.empty(p.n, dtype=np.int64)
    ranks[np.argsort(-x, kind="stable")] = np.arange(p.n)
    return ranks * cfg.spectral_bins // max(p.n, 1)


def acyclic_fix(
    g: DiGraph,
    p: BiPartition,
    cfg: AcyclicFixConfig | None = None,
    x: np.ndarray | None = None,
) -> BiPartition:
    """Minimal-cut bisection of a priority topological order of g.

    The order prefers S over T (or the spectral vector `x` in the spectral
    priority modes) and, as a secondary key, vertices whose cut edges would
    otherwise run backwards. The split keeps at least s'_min vertices in S'
    and t'_min in T'; among equal cuts the most balanced split wins, then the
    smallest one.
    """
    cfg = cfg or AcyclicFixConfig()
    if p.n != g.n:
        raise GraphInputError(f"partition covers {p.n} vertices, graph has {g.n}")
    if not is_acyclic(g):
        raise NotAcyclicError("acyclic fix requires a DAG")
    forward, backward = cut_counts(g, p)
    if forward < backward:
        raise PrecedenceError(f"cut runs mostly backwards ({forward} forward, {backward} backward)")
    n = g.n
    if n == 0:
        return p

    primary = _primary_keys(p, cfg, x).tolist()
    prio = cut_priorities(g, p).tolist()
    order = priority_topological_order(g, range(n), key=lambda v: (primary[v], prio[v]))

    in_t = p.in_t.tolist()
    s_min = next((i for i, v in enumerate(order) if in_t[v]), n)
    t_min = next((i for i, v in enumerate(reversed(order)) if not in_t[v]), n)
    s_floor = max(s_min, math.ceil(min(p.s_size, cfg.beta * n)))
    t_floor = max(t_min, math.ceil(min(p.t_size, cfg.beta * n)))

    cuts = prefix_cuts(g, order)
    candidates = np.arange(s_floor, n - t_floor + 1)
    best = min(candidates.tolist(), key=lambda k: (int(cuts[k]), abs(2 * k - n), k))
    logger.debug(
        "Acyclic fix: s'_min=%s t'_min=%s split=%s cut=%s",
        s_floor,
        t_floor,
        best,
        int(cuts[best]),
    )
    in_t_fixed = np.ones(n, dtype=bool)
    in_t_fixed[np.asarray(order[:best], dtype=np.int64)] = False
    return BiPartition(in_t=in_t_fixed)


def npl(original: BiPartition, fixed: BiPartition) -> float:
    """Share of vertices whose part label survived the repair."""
    if original.n != fixed.n:
        raise GraphInputError(f"partitions differ in size ({original.n} vs {fixed.n})")
    if original.n == 0:
        return 1.0
    return float(np.sum(original.in_t == fixed.in_t)) / original.n


def acyclic_fix_report(
    g: DiGraph,
    p: BiPartition,
    cfg: AcyclicFixConfig | None = None,
    x: np.ndarray | None = None,
) -> tuple[BiPartition, AcyclicReport]:
    cfg = cfg or AcyclicFixConfig()
    fixed = acyclic_fix(g, p, cfg, x)
    report = AcyclicReport(
        beta=cfg.beta,
        already_acyclic=is_acyclic_bipartition(g, p),
        npl=npl(p, fixed),
        before=partition_metrics(g, p),
        after=partition_metrics(g, fixed),
    )
    logger.info(
        "Acyclic fix: NPL=%.4f CON %.4f -> %.4f (already acyclic: %s)",
        report.npl,
        report.before.con,
        report.after.con,
        report.already_acyclic,
    )
    return fixed, report
