"""Subgraph enumeration over in-memory CSR graphs.

The pipeline: parse a query pattern, pick a matching order and symmetry
restrictions (:mod:`subenum.query`), compile a nested-loop plan with shared
prefix sets and pruned-adjacency directives (:mod:`subenum.plan`), then
execute it over a CSR data graph (:mod:`subenum.engine`), serially or with
worker threads.  :mod:`subenum.oracle` is an independent brute-force
reference used by the test suite.
"""

from .csr import (
    CsrGraph,
    GraphStats,
    build_csr,
    graph_stats,
    load_graph,
    load_snapshot,
    neighbors,
    parse_edge_list,
    save_snapshot,
    triangle_count,
)
from .engine import (
    CollectSink,
    CountSink,
    ExecConfig,
    RunStats,
    execute,
    execute_parallel,
)
from .plan import QueryPlan, compile_plan, plan_to_json
from .query import QueryGraph, Schedule, build_schedule, parse_query

__all__ = [
    "CsrGraph",
    "GraphStats",
    "build_csr",
    "graph_stats",
    "load_graph",
    "load_snapshot",
    "neighbors",
    "parse_edge_list",
    "save_snapshot",
    "triangle_count",
    "QueryGraph",
    "Schedule",
    "build_schedule",
    "parse_query",
    "QueryPlan",
    "compile_plan",
    "plan_to_json",
    "ExecConfig",
    "CountSink",
    "CollectSink",
    "RunStats",
    "execute",
    "execute_parallel",
]
