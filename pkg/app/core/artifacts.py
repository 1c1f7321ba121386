"""On-disk formats: orders, partitions, run-record tables, distributions, JSON summaries.

Every writer produces byte-identical output for identical inputs.
"""

import csv
import json
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

from app.core.errors import GraphInputError, OrderValidationError
from app.core.graph import BiPartition, TopologicalOrder
from app.core.locality import Distribution
from app.core.profiles import PerformanceProfile
from app.models.schemas import Part, RunRecord

RECORD_KEYS = ("graph", "algo", "seed")


def write_order(order: TopologicalOrder, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(f"{v}\n" for v in order.tolist())


def read_order(path: str | Path) -> TopologicalOrder:
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    try:
        vertices = [int(line) for line in lines]
    except ValueError as exc:
        raise OrderValidationError(f"order file {path} holds a non-integer line") from exc
    return TopologicalOrder.from_sequence(vertices)


def write_partition(p: BiPartition, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["vertex", "label"])
        for v, label in enumerate(p.labels()):
            writer.writerow([v, label.value])


def read_partition(path: str | Path) -> BiPartition:
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    try:
        by_vertex = {int(row["vertex"]): Part(row["label"]) for row in rows}
    except (KeyError, ValueError) as exc:
        raise GraphInputError(f"partition file {path} is malformed") from exc
    if sorted(by_vertex) != list(range(len(by_vertex))):
        raise GraphInputError(f"partition file {path} does not cover vertices 0..n-1")
    return BiPartition.from_labels([by_vertex[v] for v in range(len(by_vertex))])


def dump_json(payload: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def write_records(records: Sequence[RunRecord], path: str | Path, with_timing: bool = False) -> None:
    """One row per record: graph,algo,seed, then metrics in sorted order."""
    metrics = sorted({name for record in records for name in record.metrics})
    header = [*RECORD_KEYS, *metrics] + (["wall_time"] if with_timing else [])
    ordered = sorted(records, key=lambda r: (r.graph_id, r.algorithm, r.seed))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for record in ordered:
            row: list[Any] = [record.graph_id, record.algorithm, record.seed]
            row.extend(_fmt(record.metrics.get(name, "")) for name in metrics)
            if with_timing:
                row.append(_fmt(record.wall_time))
            writer.writerow(row)


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or any(key not in reader.fieldnames for key in RECORD_KEYS):
            raise GraphInputError(f"records file {path} needs columns {', '.join(RECORD_KEYS)}")
        records = []
        for row in reader:
            try:
                metrics = {
                    name: float(value)
                    for name, value in row.items()
                    if name not in RECORD_KEYS and name != "wall_time" and value not in ("", None)
                }
                seed = int(row["seed"])
                wall_time = float(row.get("wall_time") or 0.0)
            except (TypeError, ValueError) as exc:
                raise GraphInputError(f"records file {path}, line {reader.line_num}: {exc}") from exc
            records.append(
                RunRecord(
                    graph_id=row["graph"],
                    algorithm=row["algo"],
                    seed=seed,
                    wall_time=wall_time,
                    metrics=metrics,
                )
            )
    return records


def write_distributions(distributions: Mapping[str, Distribution], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for name in sorted(distributions):
            for value in distributions[name].values.tolist():
                writer.writerow([name, value])


def write_profile(profile: PerformanceProfile, path: str | Path) -> None:
    algorithms = profile.algorithms
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["tau", *algorithms])
        for i, tau in enumerate(profile.taus.tolist()):
            writer.writerow([_fmt(tau), *(_fmt(float(profile.fractions[a][i])) for a in algorithms)])


def write_table(rows: Iterable[Mapping[str, Any]], path: str | Path) -> None:
    rows = list(rows)
    columns: list[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(col, "")) for col in columns])


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value
