#!/usr/bin/env python3
"""Compare pruning strategies on one query over a synthetic or file graph.

Examples:
    python scripts/bench_strategies.py --gen powerlaw --n 20000 --m 8 --query clique4
    python scripts/bench_strategies.py --graph data/wiki.txt --query house --variant vertex
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from subenum.csr import build_csr, load_graph
from subenum.engine import ExecConfig, execute
from subenum.gen import generate
from subenum.plan import compile_plan
from subenum.query import QueryGraph, build_schedule, parse_query

SHAPES = {
    "triangle": [(0, 1), (0, 2), (1, 2)],
    "path4": [(0, 1), (1, 2), (2, 3)],
    "star4": [(0, 1), (0, 2), (0, 3)],
    "cycle4": [(0, 1), (1, 2), (2, 3), (0, 3)],
    "diamond": [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)],
    "clique4": [(i, j) for i in range(4) for j in range(i + 1, 4)],
    "clique5": [(i, j) for i in range(5) for j in range(i + 1, 5)],
    "house": [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4)],
}


def load_query(name_or_path: str) -> QueryGraph:
    if name_or_path in SHAPES:
        edges = SHAPES[name_or_path]
        n = max(max(e) for e in edges) + 1
        return QueryGraph.from_edges(n, edges)
    return parse_query(Path(name_or_path).read_text())


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graph", help="edge-list or snapshot file")
    ap.add_argument("--gen", choices=("er", "powerlaw", "clique"), help="generate instead of loading")
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--p", type=float, default=0.001)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--query", default="clique4", help=f"file path or one of {sorted(SHAPES)}")
    ap.add_argument("--variant", choices=("edge", "vertex"), default="edge")
    ap.add_argument("--strategies", default="none,eager,online")
    ap.add_argument("--repeat", type=int, default=1, help="keep the best elapsed time of N runs")
    args = ap.parse_args()

    if bool(args.graph) == bool(args.gen):
        ap.error("give exactly one of --graph / --gen")
    if args.gen:
        g = build_csr(generate(args.gen, args.n, seed=args.seed, p=args.p, m=args.m))
    else:
        g = load_graph(args.graph)
    q = load_query(args.query)
    sched = build_schedule(q, variant=args.variant)
    print(f"graph: {g.vertex_count} vertices, {g.edge_count} edges; order {sched.order}")

    rows = []
    for strategy in args.strategies.split(","):
        plan = compile_plan(q, sched, strategy)
        best = None
        for _ in range(max(args.repeat, 1)):
            stats = execute(plan, g, config=ExecConfig())
            if best is None or stats.elapsed_seconds < best.elapsed_seconds:
                best = stats
        rows.append((strategy, best))

    hdr = f"{'strategy':<10}{'matches':>12}{'adjacency':>14}{'prefix':>14}{'pruned':>14}{'comparisons':>14}{'aux peak B':>12}{'seconds':>10}"
    print(hdr)
    for strategy, st in rows:
        print(
            f"{strategy:<10}{st.match_count:>12}{st.scanned_adjacency:>14}"
            f"{st.scanned_prefix:>14}{st.scanned_pruned:>14}{st.comparisons:>14}"
            f"{st.aux_bytes_peak_per_worker:>12}{st.elapsed_seconds:>10.3f}"
        )
    counts = {st.match_count for _, st in rows}
    if len(counts) > 1:
        print("COUNT MISMATCH ACROSS STRATEGIES", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
