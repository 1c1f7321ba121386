"""Baseline topological orderers.

Every orderer only ever emits a vertex once all of its parents are placed, so
the output is a topological order even where the underlying heuristic (DFS,
Cuthill-McKee, Gorder) would not produce one on its own.
"""

import heapq
import logging
from collections import deque

import numpy as np

from app.core.config import settings
from app.core.errors import NotAcyclicError
from app.core.graph import DiGraph, TopologicalOrder
from app.models.schemas import ToporderAlgorithm

logger = logging.getLogger(__name__)


def _finish(g: DiGraph, order: list[int], name: str) -> TopologicalOrder:
    if len(order) != g.n:
        raise NotAcyclicError(f"{name} order requires a DAG; {g.n - len(order)} vertices sit on cycles")
    return TopologicalOrder.from_sequence(order)


def dfs_order(g: DiGraph) -> TopologicalOrder:
    remaining = g.in_deg.tolist()
    stack = [v for v in range(g.n - 1, -1, -1) if remaining[v] == 0]
    order: list[int] = []
    while stack:
        v = stack.pop()
        order.append(v)
        ready = []
        for u in g.out_adj[v]:
            remaining[u] -= 1
            if remaining[u] == 0:
                ready.append(u)
        # Smallest id on top of the stack.
        stack.extend(sorted(ready, reverse=True))
    return _finish(g, order, "DFS")


def bfs_min_outdeg_order(g: DiGraph) -> TopologicalOrder:
    out_deg = g.out_deg.tolist()
    remaining = g.in_deg.tolist()
    by_out_degree = lambda v: (out_deg[v], v)  # noqa: E731
    queue = deque(sorted((v for v in range(g.n) if remaining[v] == 0), key=by_out_degree))
    order: list[int] = []
    while queue:
        v = queue.popleft()
        order.append(v)
        ready = []
        for u in g.out_adj[v]:
            remaining[u] -= 1
            if remaining[u] == 0:
                ready.append(u)
        queue.extend(sorted(ready, key=by_out_degree))
    return _finish(g, order, "BFS")


def cuthill_mckee_acyclic(g: DiGraph) -> TopologicalOrder:
    """Cuthill-McKee restricted to ready vertices.

    Sources are taken one at a time by ascending total degree. From each
    source the order grows level by level; a level is emitted by earliest
    placed parent, then ascending total degree.
    """
    degree = (g.out_deg + g.in_deg).tolist()
    remaining = g.in_deg.tolist()
    earliest_parent = [g.n] * g.n
    sources = [(degree[v], v) for v in range(g.n) if remaining[v] == 0]
    heapq.heapify(sources)
    order: list[int] = []
    while sources:
        _, root = heapq.heappop(sources)
        level = [(earliest_parent[root], degree[root], root)]
        while level:
            next_level: list[tuple[int, int, int]] = []
            heapq.heapify(level)
            while level:
                _, _, v = heapq.heappop(level)
                order.append(v)
                position = len(order) - 1
                for u in g.out_adj[v]:
                    earliest_parent[u] = min(earliest_parent[u], position)
                    remaining[u] -= 1
                    if remaining[u] == 0:
                        next_level.append((earliest_parent[u], degree[u], u))
            level = next_level
    return _finish(g, order, "Cuthill-McKee")


def gorder_acyclic(g: DiGraph, window: int | None = None) -> TopologicalOrder:
    """Greedy Gorder over ready vertices.

    The score of a candidate is the sum over the last `window` placed vertices
    of direct edges plus shared in-neighbours; ties go to the smaller id.
    """
    window = window if window is not None else settings.gorder_window
    if window < 1:
        raise ValueError("window must be at least 1")
    n = g.n
    score = [0] * n
    remaining = g.in_deg.tolist()
    ready = np.zeros(n, dtype=bool)
    placed = np.zeros(n, dtype=bool)
    heap: list[tuple[int, int]] = []

    def bump(w: int, delta: int) -> None:
        touched: list[int] = []
        for v in g.out_adj[w]:
            score[v] += delta
            touched.append(v)
        for p in g.in_adj[w]:
            for v in g.out_adj[p]:
                if v != w:
                    score[v] += delta
                    touched.append(v)
        for v in touched:
            if ready[v] and not placed[v]:
                heapq.heappush(heap, (-score[v], v))

    for v in range(n):
        if remaining[v] == 0:
            ready[v] = True
            heap.append((0, v))
    heapq.heapify(heap)

    order: list[int] = []
    recent: deque[int] = deque()
    while heap:
        neg, v = heapq.heappop(heap)
        if placed[v] or -neg != score[v]:
            continue
        placed[v] = True
        order.append(v)
        for u in g.out_adj[v]:
            remaining[u] -= 1
            if remaining[u] == 0:
                ready[u] = True
                heapq.heappush(heap, (-score[u], u))
        recent.append(v)
        bump(v, 1)
        if len(recent) > window:
            bump(recent.popleft(), -1)
    return _finish(g, order, "Gorder")


def run_baseline(g: DiGraph, algorithm: ToporderAlgorithm) -> TopologicalOrder:
    if algorithm == ToporderAlgorithm.dfs:
        return dfs_order(g)
    if algorithm == ToporderAlgorithm.bfs:
        return bfs_min_outdeg_order(g)
    if algorithm == ToporderAlgorithm.cm:
        return cuthill_mckee_acyclic(g)
    if algorithm == ToporderAlgorithm.gorder:
        return gorder_acyclic(g)
    raise ValueError(f"{algorithm.value} is not a baseline orderer")
