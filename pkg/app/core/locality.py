"""Locality metrics of a topological order: edge lengths, reuse distances, edge cuts."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.graph import DiGraph, TopologicalOrder, require_valid_order
from app.models.schemas import LocalitySummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Sorted multiset of non-negative integers with cached summaries.

    The median is the lower middle element; an empty distribution reports 0
    for every summary.
    """

    values: np.ndarray
    total: int
    maximum: int
    median: int

    @classmethod
    def of(cls, values: Sequence[int] | np.ndarray) -> "Distribution":
        data = np.sort(np.asarray(values, dtype=np.int64))
        if data.size == 0:
            return cls(values=data, total=0, maximum=0, median=0)
        return cls(
            values=data,
            total=int(data.sum()),
            maximum=int(data[-1]),
            median=int(data[(data.size - 1) // 2]),
        )

    def __len__(self) -> int:
        return int(self.values.size)


def edge_length_distribution(g: DiGraph, order: TopologicalOrder) -> Distribution:
    require_valid_order(g, order)
    return Distribution.of(order.sigma[g.dst] - order.sigma[g.src])


def access_pattern(g: DiGraph, order: TopologicalOrder) -> np.ndarray:
    """Each vertex in order, preceded by its in-neighbours in order position."""
    require_valid_order(g, order)
    sigma = order.sigma
    pattern: list[int] = []
    for v in order.order.tolist():
        parents = g.in_adj[v]
        if parents:
            pattern.extend(sorted(parents, key=lambda u: sigma[u]))
        pattern.append(v)
    return np.asarray(pattern, dtype=np.int64)


class _FenwickTree:
    def __init__(self, size: int) -> None:
        self.size = size
        self.tree = [0] * (size + 1)

    def add(self, index: int, delta: int) -> None:
        i = index + 1
        while i <= self.size:
            self.tree[i] += delta
            i += i & -i

    def prefix(self, index: int) -> int:
        """Sum over positions 0..index-1."""
        total = 0
        i = index
        while i > 0:
            total += self.tree[i]
            i -= i & -i
        return total


def reuse_distances(pattern: Sequence[int] | np.ndarray) -> np.ndarray:
    """Distinct values strictly between consecutive accesses, in access order.

    Marks the last access time of every value in a Fenwick tree, so each
    distance is a range count between the previous and the current access.
    """
    accesses = np.asarray(pattern, dtype=np.int64).tolist()
    tree = _FenwickTree(len(accesses))
    last: dict[int, int] = {}
    out: list[int] = []
    for t, value in enumerate(accesses):
        previous = last.get(value)
        if previous is not None:
            out.append(tree.prefix(t) - tree.prefix(previous + 1))
            tree.add(previous, -1)
        tree.add(t, 1)
        last[value] = t
    return np.asarray(out, dtype=np.int64)


def reuse_distance_distribution(pattern: Sequence[int] | np.ndarray) -> Distribution:
    return Distribution.of(reuse_distances(pattern))


def reuse_distance_naive(pattern: Sequence[int] | np.ndarray) -> Distribution:
    """Quadratic reference: count distinct values in each reuse window directly."""
    accesses = list(np.asarray(pattern, dtype=np.int64).tolist())
    last: dict[int, int] = {}
    out: list[int] = []
    for t, value in enumerate(accesses):
        if value in last:
            out.append(len(set(accesses[last[value] + 1 : t])))
        last[value] = t
    return Distribution.of(out)


def edge_cut_distribution(g: DiGraph, order: TopologicalOrder) -> Distribution:
    """Edges crossing each split i | i+1 for i = 0..n-2."""
    require_valid_order(g, order)
    if g.n < 2:
        return Distribution.of([])
    diff = np.zeros(g.n, dtype=np.int64)
    np.add.at(diff, order.sigma[g.src], 1)
    np.add.at(diff, order.sigma[g.dst], -1)
    return Distribution.of(np.cumsum(diff)[: g.n - 1])


@dataclass(frozen=True, eq=False)
class LocalityReport:
    edge_length: Distribution
    reuse: Distribution
    edge_cut: Distribution

    def summary(self) -> LocalitySummary:
        return LocalitySummary(
            bandwidth=self.edge_length.maximum,
            mla=self.edge_length.total,
            cutwidth=self.edge_cut.maximum,
            median_edge_length=self.edge_length.median,
            median_edge_cut=self.edge_cut.median,
            total_reuse=self.reuse.total,
            max_reuse=self.reuse.maximum,
            median_reuse=self.reuse.median,
        )


def locality_report(g: DiGraph, order: TopologicalOrder) -> LocalityReport:
    report = LocalityReport(
        edge_length=edge_length_distribution(g, order),
        reuse=reuse_distance_distribution(access_pattern(g, order)),
        edge_cut=edge_cut_distribution(g, order),
    )
    if report.edge_length.total != report.edge_cut.total:
        logger.error(
            "Edge lengths sum to %s but bisection cuts sum to %s",
            report.edge_length.total,
            report.edge_cut.total,
        )
    return report


def summarize_locality(g: DiGraph, order: TopologicalOrder) -> LocalitySummary:
    return locality_report(g, order).summary()
