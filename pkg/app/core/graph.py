"""Immutable directed graph plus the partition and order types built on it.

Vertices are dense integer ids 0..n-1. Edges are stored once, sorted by
(source, target), with self-loops and duplicates removed at construction.
"""

import heapq
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from app.core.errors import GraphInputError, OrderValidationError
from app.models.schemas import Part

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DiGraph:
    n: int
    src: np.ndarray
    dst: np.ndarray
    out_adj: tuple[tuple[int, ...], ...]
    in_adj: tuple[tuple[int, ...], ...]
    out_deg: np.ndarray
    in_deg: np.ndarray
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    labels: tuple[str, ...] | None = field(default=None)

    @property
    def num_edges(self) -> int:
        return int(self.src.shape[0])

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, m={self.num_edges})"


def build_graph(
    n: int,
    edge_list: Iterable[tuple[int, int]] | np.ndarray,
    labels: Sequence[str] | None = None,
) -> DiGraph:
    """Build a DiGraph on n vertices, dropping self-loops and duplicate edges."""
    if n < 0:
        raise GraphInputError(f"vertex count must be non-negative, got {n}")
    pairs = np.asarray(list(edge_list) if not isinstance(edge_list, np.ndarray) else edge_list, dtype=np.int64)
    if pairs.size == 0:
        pairs = pairs.reshape(0, 2)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise GraphInputError("edge list must consist of (u, v) pairs")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
        raise GraphInputError(f"edge ({bad[0]}, {bad[1]}) has an endpoint outside 0..{n - 1}")
    if labels is not None and len(labels) != n:
        raise GraphInputError(f"expected {n} labels, got {len(labels)}")

    loops = pairs[:, 0] == pairs[:, 1]
    kept = pairs[~loops]
    codes = np.unique(kept[:, 0] * max(n, 1) + kept[:, 1])
    src = (codes // max(n, 1)).astype(np.int64)
    dst = (codes % max(n, 1)).astype(np.int64)

    dropped_loops = int(loops.sum())
    dropped_dups = int(kept.shape[0] - codes.shape[0])
    if dropped_loops or dropped_dups:
        logger.warning(
            "Dropped %s self-loops and %s duplicate edges while building graph (n=%s)",
            dropped_loops,
            dropped_dups,
            n,
        )

    out_lists: list[list[int]] = [[] for _ in range(n)]
    in_lists: list[list[int]] = [[] for _ in range(n)]
    for u, v in zip(src.tolist(), dst.tolist()):
        out_lists[u].append(v)
        in_lists[v].append(u)
    for lst in in_lists:
        lst.sort()

    return DiGraph(
        n=n,
        src=src,
        dst=dst,
        out_adj=tuple(tuple(lst) for lst in out_lists),
        in_adj=tuple(tuple(lst) for lst in in_lists),
        out_deg=np.bincount(src, minlength=n).astype(np.int64),
        in_deg=np.bincount(dst, minlength=n).astype(np.int64),
        dropped_self_loops=dropped_loops,
        dropped_duplicates=dropped_dups,
        labels=tuple(labels) if labels is not None else None,
    )


def weakly_connected_components(g: DiGraph) -> list[list[int]]:
    """Components under undirected reachability, ordered by smallest vertex."""
    if g.n == 0:
        return []
    adjacency = coo_matrix((np.ones(g.num_edges), (g.src, g.dst)), shape=(g.n, g.n))
    _, raw = connected_components(adjacency, directed=True, connection="weak")
    # Relabel so component ids follow the first vertex that appears in them.
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(order.shape[0])
    labels = relabel[raw]
    members = np.argsort(labels, kind="stable")
    bounds = np.cumsum(np.bincount(labels, minlength=order.shape[0]))[:-1]
    return [chunk.tolist() for chunk in np.split(members, bounds)]


def is_weakly_connected(g: DiGraph) -> bool:
    return len(weakly_connected_components(g)) <= 1


def induced_subgraph(g: DiGraph, vertices: Iterable[int]) -> tuple[DiGraph, np.ndarray]:
    """Subgraph on `vertices` relabelled to 0..k-1 in ascending original id.

    Returns the subgraph and the array mapping new ids to original ids.
    """
    keep = np.unique(np.fromiter(vertices, dtype=np.int64))
    index = np.full(g.n, -1, dtype=np.int64)
    index[keep] = np.arange(keep.shape[0])
    mask = (index[g.src] >= 0) & (index[g.dst] >= 0)
    pairs = np.stack([index[g.src[mask]], index[g.dst[mask]]], axis=1)
    labels = None
    if g.labels is not None:
        labels = [g.labels[v] for v in keep.tolist()]
    return build_graph(int(keep.shape[0]), pairs, labels=labels), keep


def largest_weakly_connected_component(g: DiGraph) -> tuple[DiGraph, np.ndarray]:
    """Induced subgraph on the largest component; ties go to the earliest one."""
    components = weakly_connected_components(g)
    if not components:
        return g, np.arange(0, dtype=np.int64)
    largest = max(components, key=len)
    return induced_subgraph(g, largest)


def kahn_order(g: DiGraph) -> list[int]:
    """Smallest-id-first topological order; shorter than n iff g has a cycle."""
    remaining = g.in_deg.copy()
    ready = [v for v in range(g.n) if remaining[v] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for u in g.out_adj[v]:
            remaining[u] -= 1
            if remaining[u] == 0:
                heapq.heappush(ready, u)
    return order


def is_acyclic(g: DiGraph) -> bool:
    return len(kahn_order(g)) == g.n


def degree_difference_vector(g: DiGraph) -> np.ndarray:
    """d_v = out_deg(v) - in_deg(v); sum_{(u,v)} (x_u - x_v) == d @ x."""
    return (g.out_deg - g.in_deg).astype(np.float64)


# --- Orders ---

@dataclass(frozen=True, eq=False)
class TopologicalOrder:
    """Bijection vertex -> position. `order[i]` is the vertex at position i."""

    sigma: np.ndarray
    order: np.ndarray

    @classmethod
    def from_sequence(cls, vertices: Sequence[int] | np.ndarray) -> "TopologicalOrder":
        order = np.asarray(vertices, dtype=np.int64)
        n = order.shape[0]
        if n and (order.min() < 0 or order.max() >= n or np.unique(order).shape[0] != n):
            raise OrderValidationError("order is not a permutation of 0..n-1")
        sigma = np.empty(n, dtype=np.int64)
        sigma[order] = np.arange(n)
        return cls(sigma=sigma, order=order)

    @classmethod
    def from_positions(cls, positions: Sequence[int] | np.ndarray) -> "TopologicalOrder":
        sigma = np.asarray(positions, dtype=np.int64)
        n = sigma.shape[0]
        if n and (sigma.min() < 0 or sigma.max() >= n or np.unique(sigma).shape[0] != n):
            raise OrderValidationError("positions are not a permutation of 0..n-1")
        order = np.empty(n, dtype=np.int64)
        order[sigma] = np.arange(n)
        return cls(sigma=sigma, order=order)

    def __len__(self) -> int:
        return int(self.order.shape[0])

    def tolist(self) -> list[int]:
        return self.order.tolist()


def validate_toporder(g: DiGraph, order: TopologicalOrder) -> bool:
    """True iff every edge goes forward under order.sigma."""
    if len(order) != g.n:
        return False
    return bool(np.all(order.sigma[g.src] < order.sigma[g.dst]))


def require_valid_order(g: DiGraph, order: TopologicalOrder) -> None:
    if not validate_toporder(g, order):
        raise OrderValidationError("order is not a topological order of the graph")


# --- Bi-partitions ---

@dataclass(frozen=True, eq=False)
class BiPartition:
    """Two-way vertex assignment; `in_t[v]` is True iff v is in T."""

    in_t: np.ndarray

    @classmethod
    def from_sets(cls, n: int, s: Iterable[int], t: Iterable[int]) -> "BiPartition":
        s_arr = np.fromiter(s, dtype=np.int64)
        t_arr = np.fromiter(t, dtype=np.int64)
        both = np.concatenate([s_arr, t_arr])
        if both.shape[0] != n or (n and (both.min() < 0 or both.max() >= n)) or np.unique(both).shape[0] != n:
            raise GraphInputError("S and T must be disjoint and cover 0..n-1")
        in_t = np.zeros(n, dtype=bool)
        in_t[t_arr] = True
        return cls(in_t=in_t)

    @classmethod
    def from_labels(cls, labels: Sequence[Part | str]) -> "BiPartition":
        return cls(in_t=np.array([Part(label) == Part.T for label in labels], dtype=bool))

    @property
    def n(self) -> int:
        return int(self.in_t.shape[0])

    @property
    def s_size(self) -> int:
        return int(self.n - self.in_t.sum())

    @property
    def t_size(self) -> int:
        return int(self.in_t.sum())

    def s_vertices(self) -> list[int]:
        return np.flatnonzero(~self.in_t).tolist()

    def t_vertices(self) -> list[int]:
        return np.flatnonzero(self.in_t).tolist()

    def labels(self) -> list[Part]:
        return [Part.T if t else Part.S for t in self.in_t.tolist()]

    def swapped(self) -> "BiPartition":
        return BiPartition(in_t=~self.in_t)


def cut_counts(g: DiGraph, p: BiPartition) -> tuple[int, int]:
    """(|(S x T) & E|, |(T x S) & E|)."""
    src_t = p.in_t[g.src]
    dst_t = p.in_t[g.dst]
    return int(np.sum(~src_t & dst_t)), int(np.sum(src_t & ~dst_t))


def orient_forward(g: DiGraph, p: BiPartition) -> BiPartition:
    """Swap parts iff fewer edges run S -> T than T -> S."""
    forward, backward = cut_counts(g, p)
    return p.swapped() if forward < backward else p


def is_acyclic_bipartition(g: DiGraph, p: BiPartition) -> bool:
    return cut_counts(g, p)[1] == 0
