import logging
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from app.core.errors import ProfileError
from app.models.schemas import RunRecord

logger = logging.getLogger(__name__)

DEFAULT_TAU_POINTS = 50


@dataclass(frozen=True, eq=False)
class PerformanceProfile:
    metric: str
    taus: np.ndarray
    fractions: dict[str, np.ndarray]
    graphs: list[str]

    @property
    def algorithms(self) -> list[str]:
        return sorted(self.fractions)


def _per_graph_values(records: Iterable[RunRecord], metric: str) -> dict[str, dict[str, float]]:
    """graph -> algorithm -> median of the metric over seeds."""
    samples: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        if metric not in record.metrics:
            raise ProfileError(f"record {record.graph_id}/{record.algorithm} has no metric {metric!r}")
        samples[record.graph_id][record.algorithm].append(float(record.metrics[metric]))
    return {
        graph: {algo: float(np.median(values)) for algo, values in by_algo.items()}
        for graph, by_algo in samples.items()
    }


def performance_profile(
    records: Iterable[RunRecord],
    metric: str,
    num_taus: int = DEFAULT_TAU_POINTS,
) -> PerformanceProfile:
    """Fraction of graphs on which each algorithm is within a factor tau of the best.

    Seeds of the same (graph, algorithm) are merged by their median. Graphs
    whose best value is not positive are excluded with a warning. The tau
    grid is log-spaced from 1 to the largest finite ratio.
    """
    table = _per_graph_values(records, metric)
    algorithms = sorted({algo for by_algo in table.values() for algo in by_algo})
    if not algorithms:
        raise ProfileError("no records to profile")
    if len(algorithms) == 1:
        logger.warning("Performance profile over a single algorithm (%s) is trivially 1.0", algorithms[0])

    graphs: list[str] = []
    ratios: dict[str, list[float]] = {algo: [] for algo in algorithms}
    for graph in sorted(table):
        by_algo = table[graph]
        best = min(by_algo.values())
        if best <= 0:
            logger.warning("Excluding graph %s from the %s profile: best value is %s", graph, metric, best)
            continue
        graphs.append(graph)
        for algo in algorithms:
            value = by_algo.get(algo)
            ratios[algo].append(value / best if value is not None else np.inf)
    if not graphs:
        raise ProfileError(f"no graph has a positive best value for {metric!r}")

    ratio_arrays = {algo: np.asarray(values) for algo, values in ratios.items()}
    finite = np.concatenate([r[np.isfinite(r)] for r in ratio_arrays.values()])
    max_ratio = float(finite.max()) if finite.size else 1.0
    if max_ratio <= 1.0:
        taus = np.array([1.0])
    else:
        taus = np.geomspace(1.0, max_ratio, num=max(num_taus, 2))
        taus[0], taus[-1] = 1.0, max_ratio
    fractions = {
        algo: (r[None, :] <= taus[:, None]).mean(axis=1)
        for algo, r in ratio_arrays.items()
    }
    return PerformanceProfile(metric=metric, taus=taus, fractions=fractions, graphs=graphs)


def summarize_records(records: Iterable[RunRecord]) -> list[dict[str, float | str | int]]:
    """Median and inter-quartile range of every metric per (graph, algorithm)."""
    grouped: dict[tuple[str, str], list[RunRecord]] = defaultdict(list)
    for record in records:
        grouped[(record.graph_id, record.algorithm)].append(record)

    rows: list[dict[str, float | str | int]] = []
    for (graph, algo), group in sorted(grouped.items()):
        row: dict[str, float | str | int] = {"graph": graph, "algorithm": algo, "runs": len(group)}
        for metric in sorted({name for record in group for name in record.metrics}):
            values = np.asarray([r.metrics[metric] for r in group if metric in r.metrics], dtype=np.float64)
            q1, median, q3 = np.percentile(values, [25, 50, 75])
            row[f"{metric}_median"] = float(median)
            row[f"{metric}_iqr"] = float(q3 - q1)
        rows.append(row)
    return rows
