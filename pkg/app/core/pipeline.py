import asyncio
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from app.core.baselines import run_baseline
from app.core.bipartition import classic_spectral_bipartition, partition_metrics, spectral_bipartition
from app.core.config import settings
from app.core.graph import BiPartition, DiGraph, TopologicalOrder, require_valid_order
from app.core.ingest import load_graph
from app.core.locality import summarize_locality
from app.core.storage import save_record, set_status
from app.core.toporder import spectral_toporder
from app.models.schemas import (
    PartitionAlgorithm,
    RunRecord,
    RunRequest,
    SpectralConfig,
    StatusEnum,
    ToporderAlgorithm,
)

logger = logging.getLogger(__name__)


class SweepTask(str, Enum):
    toporder = "toporder"
    partition = "partition"


def compute_toporder(
    g: DiGraph,
    algorithm: ToporderAlgorithm,
    seed: int,
    threads: int | None = None,
) -> TopologicalOrder:
    """Run one orderer and re-validate its output."""
    if algorithm == ToporderAlgorithm.spectral_dir:
        order = spectral_toporder(g, SpectralConfig(seed=seed), threads=threads)
    elif algorithm == ToporderAlgorithm.spectral_classic:
        order = spectral_toporder(g, SpectralConfig(c=0.0, seed=seed), threads=threads)
    else:
        order = run_baseline(g, algorithm)
    require_valid_order(g, order)
    return order


def compute_bipartition(g: DiGraph, algorithm: PartitionAlgorithm, seed: int) -> BiPartition:
    cfg = SpectralConfig(seed=seed)
    if algorithm == PartitionAlgorithm.spectral_classic:
        partition, _ = classic_spectral_bipartition(g, cfg)
    else:
        partition, _ = spectral_bipartition(g, cfg)
    return partition


def execute_run(
    g: DiGraph,
    graph_id: str,
    algorithm: ToporderAlgorithm,
    seed: int,
    threads: int | None = None,
) -> tuple[TopologicalOrder, RunRecord]:
    started = time.perf_counter()
    order = compute_toporder(g, algorithm, seed, threads)
    wall_time = time.perf_counter() - started
    summary = summarize_locality(g, order)
    record = RunRecord(
        graph_id=graph_id,
        algorithm=algorithm.value,
        seed=seed,
        wall_time=wall_time,
        metrics={name: float(value) for name, value in summary.model_dump().items()},
    )
    logger.info(
        "Run complete: graph=%s algorithm=%s seed=%s mla=%s total_reuse=%s (%.2fs)",
        graph_id,
        algorithm.value,
        seed,
        summary.mla,
        summary.total_reuse,
        wall_time,
    )
    return order, record


def execute_partition_run(
    g: DiGraph,
    graph_id: str,
    algorithm: PartitionAlgorithm,
    seed: int,
) -> tuple[BiPartition, RunRecord]:
    started = time.perf_counter()
    partition = compute_bipartition(g, algorithm, seed)
    wall_time = time.perf_counter() - started
    metrics = partition_metrics(g, partition)
    record = RunRecord(
        graph_id=graph_id,
        algorithm=algorithm.value,
        seed=seed,
        wall_time=wall_time,
        metrics=metrics.model_dump(),
    )
    return partition, record


async def process_run_request(run_id: str, request: RunRequest) -> None:
    """Background task behind POST /api/runs."""
    try:
        await set_status(run_id, StatusEnum.processing)

        g = await asyncio.to_thread(load_graph, request.graph_path)
        seed = request.seed if request.seed is not None else settings.seed
        graph_id = request.graph_id or request.graph_path
        _, record = await asyncio.to_thread(execute_run, g, graph_id, request.algorithm, seed)
        record.run_id = run_id

        await save_record(record)
        await set_status(run_id, StatusEnum.done)
        logger.info("Processing complete: run_id=%s", run_id)

    except Exception as exc:
        logger.exception("Processing failed for run_id=%s", run_id)
        await set_status(run_id, StatusEnum.error, error_message=str(exc))


@dataclass(frozen=True, eq=False)
class SweepJob:
    graph_id: str
    graph: DiGraph
    algorithm: str
    seed: int
    task: SweepTask = SweepTask.toporder


def _run_job(job: SweepJob) -> RunRecord:
    if job.task == SweepTask.partition:
        _, record = execute_partition_run(job.graph, job.graph_id, PartitionAlgorithm(job.algorithm), job.seed)
    else:
        _, record = execute_run(job.graph, job.graph_id, ToporderAlgorithm(job.algorithm), job.seed, threads=1)
    return record


def run_sweep(jobs: list[SweepJob], threads: int | None = None) -> list[RunRecord]:
    """Run independent (graph, algorithm, seed) jobs; records come back in job order."""
    workers = max(1, threads if threads is not None else settings.threads)
    if workers == 1:
        records = [_run_job(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_job, jobs))
    logger.info("Sweep finished: %s runs on %s worker(s)", len(records), workers)
    return records
