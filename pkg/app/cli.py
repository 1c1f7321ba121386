"""Command-line entry point: ``python -m app.cli <command> ...``.

Exit codes: 0 ok, 1 usage, 2 unreadable input, 3 validation failure. Errors
are reported on stderr as one JSON object.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from app.core import artifacts
from app.core.acyclic import acyclic_fix_report
from app.core.bipartition import partition_metrics
from app.core.config import settings
from app.core.corpus import deviations, find_entry
from app.core.errors import (
    GraphInputError,
    MatrixMarketError,
    NotAcyclicError,
    OrderValidationError,
    PrecedenceError,
    ProfileError,
    SolverError,
)
from app.core.graph import (
    BiPartition,
    DiGraph,
    is_acyclic_bipartition,
    is_weakly_connected,
    largest_weakly_connected_component,
    require_valid_order,
)
from app.core.ingest import (
    acyclic_convert_partition_rule,
    acyclic_convert_toporder_rule,
    load_graph,
    read_matrix_market,
    save_graph,
    to_digraph,
)
from app.core.locality import locality_report
from app.core.pipeline import SweepJob, SweepTask, compute_bipartition, execute_run, run_sweep
from app.core.profiles import performance_profile, summarize_records
from app.core.spectral import solve_fiedler
from app.core.spyplot import write_spyplot
from app.core.synthgen import generate
from app.models.schemas import (
    AcyclicFixConfig,
    GraphFamily,
    PartitionAlgorithm,
    PriorityMode,
    SpectralConfig,
    SynthConfig,
    SynthSidecar,
    ToporderAlgorithm,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _seed(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else settings.seed


def _threads(args: argparse.Namespace) -> int:
    return args.threads if args.threads is not None else settings.threads


def _graph_id(path: str) -> str:
    return Path(path).name.split(".")[0]


# --- Commands ---

def cmd_gen(args: argparse.Namespace) -> int:
    cfg = SynthConfig(
        family=args.family,
        n=args.n,
        p=args.p,
        k=args.k,
        p_int=args.p_int,
        p_ext=args.p_ext,
        alpha=args.alpha,
        seed=_seed(args),
    )
    g, planted = generate(cfg)
    save_graph(g, args.out)
    sidecar = args.sidecar or f"{args.out}.planted.json"
    payload = SynthSidecar(config=cfg, labels=planted.labels())
    artifacts.dump_json(payload.model_dump(mode="json"), sidecar)
    return EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    pattern = read_matrix_market(args.input)
    raw, symmetric_pct = to_digraph(pattern)
    entry = find_entry(args.input)
    found = deviations(entry, raw, symmetric_pct) if entry is not None else []

    if args.rule == "partition":
        g = acyclic_convert_partition_rule(pattern)
    elif args.rule == "toporder":
        g = acyclic_convert_toporder_rule(pattern)
    else:
        g = raw
    save_graph(g, args.out)
    if args.report:
        artifacts.dump_json(
            {
                "source": Path(args.input).name,
                "rule": args.rule,
                "raw_vertices": raw.n,
                "raw_edges": raw.num_edges,
                "symmetric_pct": round(symmetric_pct, 1),
                "vertices": g.n,
                "edges": g.num_edges,
                "corpus_entry": entry.name if entry is not None else None,
                "corpus_deviations": found,
            },
            args.report,
        )
    logger.info("Graph converted: %s -> %s (n=%s, m=%s)", args.input, args.out, g.n, g.num_edges)
    return EXIT_OK


def _partition_on_largest_component(g: DiGraph, algorithm: PartitionAlgorithm, seed: int) -> BiPartition:
    """Partition the largest component; every other vertex joins T."""
    sub, keep = largest_weakly_connected_component(g)
    logger.warning(
        "Graph is not weakly connected; partitioning its largest component (%s of %s vertices)",
        sub.n,
        g.n,
    )
    inner = compute_bipartition(sub, algorithm, seed)
    in_t = np.ones(g.n, dtype=bool)
    in_t[keep] = inner.in_t
    return BiPartition(in_t=in_t)


def cmd_partition(args: argparse.Namespace) -> int:
    g = load_graph(args.input)
    algorithm = PartitionAlgorithm(args.algo)
    seed = _seed(args)
    if is_weakly_connected(g):
        partition = compute_bipartition(g, algorithm, seed)
    else:
        partition = _partition_on_largest_component(g, algorithm, seed)
    artifacts.write_partition(partition, args.out)
    if args.metrics_out:
        artifacts.dump_json(partition_metrics(g, partition).model_dump(), args.metrics_out)
    return EXIT_OK


def cmd_acyclic(args: argparse.Namespace) -> int:
    g = load_graph(args.input)
    partition = artifacts.read_partition(args.partition)
    if partition.n != g.n:
        raise GraphInputError(f"partition covers {partition.n} vertices, graph has {g.n}")
    cfg = AcyclicFixConfig(
        beta=args.beta if args.beta is not None else settings.beta,
        priority=args.priority,
        spectral_bins=args.bins,
    )
    x = None
    if cfg.priority != PriorityMode.labels:
        x = solve_fiedler(g, SpectralConfig(seed=_seed(args))).x
    fixed, report = acyclic_fix_report(g, partition, cfg, x)
    if not is_acyclic_bipartition(g, fixed):
        raise OrderValidationError("repaired partition still has an edge from T to S")
    artifacts.write_partition(fixed, args.out)
    if args.report:
        artifacts.dump_json(report.model_dump(mode="json"), args.report)
    return EXIT_OK


def cmd_toporder(args: argparse.Namespace) -> int:
    g = load_graph(args.input)
    algorithm = ToporderAlgorithm(args.algo)
    order, record = execute_run(g, args.graph_id or _graph_id(args.input), algorithm, _seed(args), _threads(args))
    artifacts.write_order(order, args.out)
    if args.record:
        artifacts.dump_json(record.model_dump(mode="json", exclude={"created_at", "run_id"}), args.record)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    order = artifacts.read_order(args.order)
    require_valid_order(g, order)
    report = locality_report(g, order)
    artifacts.dump_json(report.summary().model_dump(), args.out)
    if args.distributions:
        artifacts.write_distributions(
            {"edge_length": report.edge_length, "reuse_distance": report.reuse, "edge_cut": report.edge_cut},
            args.distributions,
        )
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    records = artifacts.read_records(args.records)
    known = sorted({name for record in records for name in record.metrics})
    if records and args.metric not in known:
        raise UsageError(f"unknown metric {args.metric!r}; the records carry {', '.join(known)}")
    profile = performance_profile(records, args.metric, num_taus=args.taus)
    artifacts.write_profile(profile, args.out)
    return EXIT_OK


def cmd_spyplot(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    order = artifacts.read_order(args.order)
    write_spyplot(g, order, args.out, size=args.size)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    task = SweepTask(args.task)
    choices = {a.value for a in (ToporderAlgorithm if task == SweepTask.toporder else PartitionAlgorithm)}
    unknown = sorted(set(args.algos) - choices)
    if unknown:
        raise UsageError(f"unknown {task.value} algorithm(s): {', '.join(unknown)}")
    graphs = [(_graph_id(path), load_graph(path)) for path in args.graphs]
    jobs = [
        SweepJob(graph_id=graph_id, graph=g, algorithm=algo, seed=seed, task=task)
        for graph_id, g in graphs
        for algo in args.algos
        for seed in args.seeds
    ]
    records = run_sweep(jobs, threads=_threads(args))
    artifacts.write_records(records, args.out, with_timing=args.with_timing)
    if args.summary:
        artifacts.write_table(summarize_records(records), args.summary)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dagorder", description="Spectral partitioning and topological ordering of DAGs.")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
    subparsers.required = True

    p_gen = subparsers.add_parser("gen", help="Generate a synthetic graph with a planted partition")
    p_gen.add_argument("--family", choices=[f.value for f in GraphFamily], required=True)
    p_gen.add_argument("--n", type=int, default=1000)
    p_gen.add_argument("--p", type=float, default=None, help="ER edge / WS rewiring probability")
    p_gen.add_argument("--k", type=int, default=50, help="WS ring degree")
    p_gen.add_argument("--p-int", type=float, default=0.25)
    p_gen.add_argument("--p-ext", type=float, default=0.2)
    p_gen.add_argument("--alpha", type=float, default=0.05, help="Alignment probability")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", required=True, help="Edge-list output")
    p_gen.add_argument("--sidecar", default=None, help="Planted-label JSON (default: <out>.planted.json)")
    p_gen.set_defaults(handler=cmd_gen)

    p_convert = subparsers.add_parser("convert", help="Convert a Matrix Market file to an edge list")
    p_convert.add_argument("--in", dest="input", required=True)
    p_convert.add_argument("--rule", choices=["partition", "toporder", "none"], default="toporder")
    p_convert.add_argument("--out", required=True)
    p_convert.add_argument("--report", default=None, help="JSON conversion report")
    p_convert.set_defaults(handler=cmd_convert)

    p_part = subparsers.add_parser("partition", help="Spectral bi-partition")
    p_part.add_argument("--in", dest="input", required=True)
    p_part.add_argument("--algo", choices=[a.value for a in PartitionAlgorithm], default="spectral-dir")
    p_part.add_argument("--seed", type=int, default=None)
    p_part.add_argument("--out", required=True, help="Partition CSV (vertex,label)")
    p_part.add_argument("--metrics-out", default=None, help="Partition metrics JSON")
    p_part.set_defaults(handler=cmd_partition)

    p_acyc = subparsers.add_parser("acyclic", help="Repair a bi-partition into an acyclic one")
    p_acyc.add_argument("--in", dest="input", required=True)
    p_acyc.add_argument("--partition", required=True)
    p_acyc.add_argument("--beta", type=float, default=None)
    p_acyc.add_argument("--priority", choices=[m.value for m in PriorityMode], default="labels")
    p_acyc.add_argument("--bins", type=int, default=16)
    p_acyc.add_argument("--seed", type=int, default=None)
    p_acyc.add_argument("--out", required=True)
    p_acyc.add_argument("--report", default=None, help="Impact report JSON")
    p_acyc.set_defaults(handler=cmd_acyclic)

    p_top = subparsers.add_parser("toporder", help="Compute a topological order")
    p_top.add_argument("--algo", choices=[a.value for a in ToporderAlgorithm], required=True)
    p_top.add_argument("--in", dest="input", required=True)
    p_top.add_argument("--seed", type=int, default=None)
    p_top.add_argument("--threads", type=int, default=None)
    p_top.add_argument("--graph-id", default=None)
    p_top.add_argument("--out", required=True)
    p_top.add_argument("--record", default=None, help="Run record JSON with locality summaries and wall time")
    p_top.set_defaults(handler=cmd_toporder)

    p_met = subparsers.add_parser("metrics", help="Locality summaries of an order")
    p_met.add_argument("--graph", required=True)
    p_met.add_argument("--order", required=True)
    p_met.add_argument("--out", required=True)
    p_met.add_argument("--distributions", default=None, help="Distribution CSV (metric,value)")
    p_met.set_defaults(handler=cmd_metrics)

    p_prof = subparsers.add_parser("profile", help="Performance profile from a records CSV")
    p_prof.add_argument("--records", required=True)
    p_prof.add_argument("--metric", required=True)
    p_prof.add_argument("--taus", type=int, default=50)
    p_prof.add_argument("--out", required=True)
    p_prof.set_defaults(handler=cmd_profile)

    p_spy = subparsers.add_parser("spyplot", help="Render the permuted adjacency as a PPM image")
    p_spy.add_argument("--graph", required=True)
    p_spy.add_argument("--order", required=True)
    p_spy.add_argument("--size", type=int, default=None)
    p_spy.add_argument("--out", required=True)
    p_spy.set_defaults(handler=cmd_spyplot)

    p_sweep = subparsers.add_parser("sweep", help="Run algorithms over graphs and seeds")
    p_sweep.add_argument("--graphs", nargs="+", required=True)
    p_sweep.add_argument("--algos", nargs="+", required=True)
    p_sweep.add_argument("--seeds", nargs="+", type=int, default=[0])
    p_sweep.add_argument("--task", choices=[t.value for t in SweepTask], default="toporder")
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.add_argument("--with-timing", action="store_true")
    p_sweep.add_argument("--out", required=True, help="Records CSV")
    p_sweep.add_argument("--summary", default=None, help="Median/IQR summary CSV")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_serve = subparsers.add_parser("serve", help="Start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(handler=cmd_serve)

    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
        started = time.perf_counter()
        code = args.handler(args)
        logger.debug("%s finished in %.2fs", args.command, time.perf_counter() - started)
        return code
    except (UsageError, ValidationError) as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except (OSError, MatrixMarketError, GraphInputError) as exc:
        return _fail("io", str(exc), EXIT_IO)
    except (OrderValidationError, NotAcyclicError, PrecedenceError, ProfileError, SolverError) as exc:
        return _fail("validation", str(exc), EXIT_VALIDATION)
    except Exception as exc:
        logger.exception("Command failed unexpectedly")
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_VALIDATION)


if __name__ == "__main__":
    sys.exit(main())
