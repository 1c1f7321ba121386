"""Recursive spectral topological order.

The order is refined as a vertex precedence list L_1 < ... < L_l: a set L is
split by a restricted spectral solve (vertices placed before L pinned high,
vertices after it pinned low), then the split is made acyclic by a
cardinality-preserving direction fix. Sets are addressed by their first
position in the final order, so K and M of a set never change while other
sets are refined and every round can run in parallel.
"""

import itertools
import logging
from collections import Counter
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from app.core.acyclic import priority_topological_order
from app.core.config import settings
from app.core.errors import NotAcyclicError, PrecedenceError, SolverError
from app.core.graph import DiGraph, TopologicalOrder, is_acyclic
from app.core.spectral import Restriction, resolve_coefficient, solve_restricted
from app.models.schemas import SpectralConfig

logger = logging.getLogger(__name__)

EXACT_SET_SIZE = 3


@dataclass
class VertexPrecedenceList:
    sets: list[list[int]]

    @classmethod
    def initial(cls, n: int) -> "VertexPrecedenceList":
        return cls(sets=[list(range(n))] if n else [])

    def validate(self, g: DiGraph) -> None:
        """Raise PrecedenceError unless the sets partition V with no backward edge."""
        index = np.full(g.n, -1, dtype=np.int64)
        for i, members in enumerate(self.sets):
            if not members:
                raise PrecedenceError(f"set {i} is empty")
            if np.any(index[members] >= 0):
                raise PrecedenceError(f"set {i} overlaps an earlier set")
            index[members] = i
        if np.any(index < 0):
            raise PrecedenceError("the sets do not cover every vertex")
        backward = index[g.src] > index[g.dst]
        if np.any(backward):
            k = int(np.argmax(backward))
            raise PrecedenceError(f"edge ({g.src[k]}, {g.dst[k]}) runs from a later set to an earlier one")

    def refine(self, index: int, s: list[int], t: list[int]) -> None:
        self.sets[index : index + 1] = [part for part in (s, t) if part]

    def to_order(self) -> TopologicalOrder:
        return TopologicalOrder.from_sequence([v for members in self.sets for v in members])


# --- Direction fix ---

def _direction_split(
    g: DiGraph,
    members: list[int],
    side: Callable[[int], int],
    in_t: set[int],
    s_size: int,
) -> tuple[list[int], list[int]]:
    """Cardinality-preserving acyclic split of `members`.

    `side(u)` is -1 for vertices before the set, 0 inside, +1 after.
    """
    prio: dict[int, int] = {}
    for v in members:
        prio[v] = sum(1 for u in g.out_adj[v] if side(u) > 0) - sum(1 for u in g.in_adj[v] if side(u) < 0)
    for v in members:
        v_in_t = v in in_t
        for u in g.out_adj[v]:
            if side(u) != 0 or v_in_t == (u in in_t):
                continue
            step = -1 if v_in_t else 1
            prio[v] += step
            prio[u] -= step
    order = priority_topological_order(
        g,
        members,
        key=lambda v: (v in in_t, prio[v]),
        inside=lambda u: side(u) == 0,
    )
    return order[:s_size], order[s_size:]


def direction_fix(
    g: DiGraph,
    K: Iterable[int],
    L: Iterable[int],
    M: Iterable[int],
    S: Iterable[int],
    T: Iterable[int],
) -> tuple[list[int], list[int]]:
    """Acyclic split (S', T') of L with |S'| = |S| and |T'| = |T|.

    S' and T' are returned in the priority topological order.
    """
    K, L, M, S, T = (list(part) for part in (K, L, M, S, T))
    region = np.full(g.n, -2, dtype=np.int64)
    for code, part in ((-1, K), (0, L), (1, M)):
        for v in part:
            if not 0 <= v < g.n or region[v] != -2:
                raise PrecedenceError("K, L and M must be disjoint sets of vertices")
            region[v] = code
    if np.any(region == -2):
        raise PrecedenceError("K, L and M must cover every vertex")
    if np.any(region[g.src] > region[g.dst]):
        raise PrecedenceError("K < L < M is violated by an edge running backwards")
    if sorted(S + T) != sorted(L):
        raise PrecedenceError("S and T must partition L")

    side = lambda u: int(region[u])  # noqa: E731
    return _direction_split(g, L, side, set(T), len(S))


# --- Spectral topological order ---

def _subproblem_seed(seed: int, start: int) -> int:
    return int(np.random.SeedSequence([seed, start]).generate_state(1, dtype=np.uint64)[0])


def _exact_small_order(g: DiGraph, members: list[int], side: Callable[[int], int]) -> list[int]:
    """Topological order of a tiny set minimising the length of edges touching it.

    Outside endpoints sit just before or just after the set.
    """
    best: tuple[int, tuple[int, ...]] | None = None
    size = len(members)
    for perm in itertools.permutations(sorted(members)):
        pos = {v: i for i, v in enumerate(perm)}
        if any(pos[u] > pos[v] for u in perm for v in g.out_adj[u] if v in pos):
            continue
        cost = 0
        for v in perm:
            for u in g.out_adj[v]:
                if u in pos:
                    cost += pos[u] - pos[v]
                elif side(u) > 0:
                    cost += size - pos[v]
            for u in g.in_adj[v]:
                if u not in pos and side(u) < 0:
                    cost += pos[v] + 1
        if best is None or cost < best[0]:
            best = (cost, perm)
    if best is None:
        raise NotAcyclicError("the selected vertices contain a directed cycle")
    return list(best[1])


def _refine(
    g: DiGraph,
    cfg: SpectralConfig,
    start: np.ndarray,
    first: int,
    members: list[int],
) -> tuple[list[list[int]], str]:
    size = len(members)
    end = first + size

    def side(u: int) -> int:
        pos = start[u]
        return -1 if pos < first else (0 if pos == first else 1)

    if size <= EXACT_SET_SIZE:
        return [[v] for v in _exact_small_order(g, members, side)], "exact"

    restriction = Restriction(K=np.flatnonzero(start < first), M=np.flatnonzero(start >= end))
    sub_cfg = cfg.model_copy(update={"seed": _subproblem_seed(cfg.seed, first)})
    in_t: set[int] | None = None
    kind = "spectral"
    try:
        solution = solve_restricted(g, sub_cfg, restriction)
        values = solution.x[members]
        if np.all(np.isfinite(values)):
            in_t = {v for v, value in zip(members, values.tolist()) if not value > 0}
        if not solution.converged:
            kind = "unconverged"
    except SolverError as exc:
        logger.debug("Restricted solve failed at position %s: %s", first, exc)
    except Exception:
        logger.exception("Restricted solve crashed at position %s; splitting the block at its midpoint", first)

    if in_t is not None and size == g.n:
        forward = sum(1 for u, v in zip(g.src.tolist(), g.dst.tolist()) if u not in in_t and v in in_t)
        backward = sum(1 for u, v in zip(g.src.tolist(), g.dst.tolist()) if u in in_t and v not in in_t)
        if forward < backward:
            in_t = set(members) - in_t

    if in_t is None or not in_t or len(in_t) == size:
        head, tail = _direction_split(g, members, side, set(), (size + 1) // 2)
        return [head, tail], "fallback"
    head, tail = _direction_split(g, members, side, in_t, size - len(in_t))
    return [head, tail], kind


def spectral_toporder(
    g: DiGraph,
    cfg: SpectralConfig | None = None,
    threads: int | None = None,
) -> TopologicalOrder:
    """Topological order of a DAG by recursive restricted spectral bisection.

    The direction coefficient is resolved once on the whole graph and shared
    by every subproblem; each subproblem draws its seed from (seed, first
    position of its set), so the result does not depend on `threads`.
    """
    cfg = cfg or SpectralConfig()
    if not is_acyclic(g):
        raise NotAcyclicError("spectral topological order requires a DAG")
    n = g.n
    if n == 0:
        return TopologicalOrder.from_sequence([])
    cfg = cfg.model_copy(update={"c": resolve_coefficient(g, cfg)})
    workers = max(1, threads if threads is not None else settings.threads)

    start = np.zeros(n, dtype=np.int64)
    blocks: dict[int, list[int]] = {0: list(range(n))}
    stats: Counter[str] = Counter()
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            pending = sorted(
                ((first, members) for first, members in blocks.items() if len(members) > 1),
                key=lambda item: (-len(item[1]), item[0]),
            )
            if not pending:
                break
            jobs = [(first, members) for first, members in pending]
            if pool is not None:
                results = list(pool.map(lambda job: _refine(g, cfg, start, *job), jobs))
            else:
                results = [_refine(g, cfg, start, *job) for job in jobs]
            for (first, _), (chunks, kind) in zip(jobs, results):
                stats[kind] += 1
                offset = first
                for chunk in chunks:
                    blocks[offset] = chunk
                    start[chunk] = offset
                    offset += len(chunk)
            if logger.isEnabledFor(logging.DEBUG):
                VertexPrecedenceList(sets=[blocks[k] for k in sorted(blocks)]).validate(g)
    finally:
        if pool is not None:
            pool.shutdown()

    if stats["fallback"] or stats["unconverged"]:
        logger.warning(
            "Spectral order used %s fallback splits and %s unconverged solves out of %s refinements",
            stats["fallback"],
            stats["unconverged"],
            sum(stats.values()),
        )
    logger.info("Spectral order on %s vertices finished: %s", n, dict(stats))
    return VertexPrecedenceList(sets=[blocks[k] for k in sorted(blocks)]).to_order()
