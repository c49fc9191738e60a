"""Command-line harness: run queries, compare strategies, generate graphs.

Exit codes: 0 success, 1 runtime failure, 2 usage or input parse error,
3 cross-strategy count disagreement (a correctness violation, fatal).
"""

from __future__ import annotations

import argparse
import json
import sys

from .csr import CsrGraph, EdgeListParseError, SnapshotFormatError, graph_stats, load_graph
from .engine import CollectSink, CountSink, EngineError, ExecConfig, execute, execute_parallel
from .gen import generate
from .plan import PlanError, compile_plan
from .query import QueryParseError, build_schedule, parse_query

STATS_VERSION = 1


class _UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from exc


def _load_graph(path: str) -> CsrGraph:
    try:
        return load_graph(path)
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from exc
    except (EdgeListParseError, SnapshotFormatError) as exc:
        raise _UsageError(f"bad graph file {path}: {exc}") from exc


def _load_query(path: str):
    try:
        return parse_query(_read_text(path))
    except QueryParseError as exc:
        raise _UsageError(f"bad query file {path}: {exc}") from exc


def _exec_config(args) -> ExecConfig:
    cfg = ExecConfig(
        workers=args.workers,
        nested=args.nested,
        nested_threshold=args.nested_threshold,
        high_degree_threshold=args.high_degree_threshold,
    )
    if cfg.workers < 1:
        raise _UsageError("--workers must be >= 1")
    if cfg.nested_threshold < 1:
        raise _UsageError("--nested-threshold must be >= 1")
    return cfg


def _run_engine(plan, graph, sink, cfg: ExecConfig):
    if cfg.workers > 1 or cfg.nested:
        return execute_parallel(plan, graph, sink, cfg)
    return execute(plan, graph, sink, cfg)


def _stats_doc(stats) -> dict:
    doc = json.loads(stats.to_json())
    doc["stats_version"] = STATS_VERSION
    return doc


def cmd_run(args) -> int:
    graph = _load_graph(args.graph)
    query = _load_query(args.query)
    schedule = build_schedule(query, variant=args.variant)
    try:
        plan = compile_plan(query, schedule, strategy=args.strategy)
    except PlanError as exc:
        raise _UsageError(f"planning failed: {exc}") from exc
    cfg = _exec_config(args)
    sink = CollectSink() if args.mode == "list" else CountSink()
    stats = _run_engine(plan, graph, sink, cfg)
    if args.mode == "list":
        # tuples arrive in matching-position order; report per query vertex
        for match in sink.matches:
            by_vertex = [0] * query.vertex_count
            for pos, vid in enumerate(match):
                by_vertex[plan.order[pos]] = vid
            print(" ".join(str(v) for v in by_vertex))
    else:
        print(stats.match_count)
    if args.stats_out:
        with open(args.stats_out, "w", encoding="utf-8") as fh:
            json.dump(_stats_doc(stats), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def cmd_compare(args) -> int:
    strategies = [s for s in args.strategy.split(",") if s]
    if not strategies:
        raise _UsageError("no strategies given")
    for s in strategies:
        if s not in ("none", "eager", "online"):
            raise _UsageError(f"unknown strategy {s!r}")
    graph = _load_graph(args.graph)
    query = _load_query(args.query)
    schedule = build_schedule(query, variant=args.variant)
    cfg = _exec_config(args)
    results = []
    for s in strategies:
        plan = compile_plan(query, schedule, strategy=s)
        results.append((s, _run_engine(plan, graph, CountSink(), cfg)))
    counts = {stats.match_count for _, stats in results}
    if len(counts) > 1:
        print("count mismatch across strategies:", file=sys.stderr)
        for s, stats in results:
            print(f"  {s}: {stats.match_count}", file=sys.stderr)
        return 3
    header = f"{'strategy':<10}{'matches':>12}{'adjacency':>12}{'prefix':>12}{'pruned':>12}{'comparisons':>14}{'seconds':>10}"
    print(header)
    for s, stats in results:
        print(
            f"{s:<10}{stats.match_count:>12}{stats.scanned_adjacency:>12}"
            f"{stats.scanned_prefix:>12}{stats.scanned_pruned:>12}"
            f"{stats.comparisons:>14}{stats.elapsed_seconds:>10.4f}"
        )
    buckets = sorted(
        {int(b) for _, stats in results for b in stats.degree_histogram},
    )
    if buckets:
        print()
        print("scanned vertices by original adjacency-list length:")
        names = "".join(f"{s:>12}" for s, _ in results)
        print(f"{'bucket':<10}{names}")
        for b in buckets:
            row = "".join(
                f"{stats.degree_histogram.get(str(b), 0):>12}" for _, stats in results
            )
            print(f"{b:<10}{row}")
    if args.stats_out:
        doc = {
            "stats_version": STATS_VERSION,
            "strategies": {s: _stats_doc(stats) for s, stats in results},
        }
        with open(args.stats_out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def cmd_gen(args) -> int:
    try:
        edges = generate(args.kind, args.n, seed=args.seed, p=args.p, m=args.m)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    lines = [f"{u} {v}" for u, v in edges]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_stats(args) -> int:
    graph = _load_graph(args.graph)
    st = graph_stats(graph)
    degrees = graph.degrees()
    doc = {
        "stats_version": STATS_VERSION,
        "vertices": st.vertex_count,
        "edges": st.edge_count,
        "max_degree": st.max_degree,
        "avg_degree": float(degrees.mean()) if len(degrees) else 0.0,
        "triangles": st.triangle_count,
        "p1": st.p1,
        "p2": st.p2,
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def _add_run_flags(p: argparse.ArgumentParser, strategy_default: str) -> None:
    p.add_argument("--graph", required=True, help="edge-list or snapshot file")
    p.add_argument("--query", required=True, help="query pattern file")
    p.add_argument("--variant", choices=("edge", "vertex"), default="edge")
    p.add_argument("--strategy", default=strategy_default)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--nested", action="store_true")
    p.add_argument("--nested-threshold", type=int, default=512)
    p.add_argument("--high-degree-threshold", type=float, default=None)
    p.add_argument("--stats-out", default=None, help="write run statistics JSON here")
    p.add_argument("--seed", type=int, default=None, help="accepted for config echo; runs are deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subenum",
        description="Enumerate subgraph matches of a small query pattern in a data graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one query and print the match count or matches")
    _add_run_flags(run, "none")
    run.add_argument("--mode", choices=("count", "list"), default="count")
    run.set_defaults(fn=cmd_run)

    comp = sub.add_parser("compare", help="run several strategies and compare counters")
    _add_run_flags(comp, "none,eager,online")
    comp.add_argument("--mode", choices=("count",), default="count")
    comp.set_defaults(fn=cmd_compare)

    gen = sub.add_parser("gen", help="generate a synthetic graph edge list")
    gen.add_argument("kind", choices=("er", "powerlaw", "clique"))
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, default=0.1, help="er edge probability")
    gen.add_argument("--m", type=int, default=4, help="powerlaw edges per new vertex")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None)
    gen.set_defaults(fn=cmd_gen)

    stats = sub.add_parser("stats", help="print graph statistics as JSON")
    stats.add_argument("--graph", required=True)
    stats.set_defaults(fn=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EngineError, PlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
