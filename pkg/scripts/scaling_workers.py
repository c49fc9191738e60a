#!/usr/bin/env python3
"""Measure wall time across worker counts, with and without nested tasks.

Counts must be identical in every configuration; the script exits nonzero if
they are not.  Note the interpreter's global lock: speedups here reflect the
numpy time released during kernel calls, not full parallelism.

Example:
    python scripts/scaling_workers.py --gen powerlaw --n 50000 --m 10 --query clique5
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from subenum.csr import build_csr, load_graph
from subenum.engine import ExecConfig, execute_parallel
from subenum.gen import generate
from subenum.plan import compile_plan
from subenum.query import build_schedule

from bench_strategies import load_query


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graph")
    ap.add_argument("--gen", choices=("er", "powerlaw", "clique"))
    ap.add_argument("--n", type=int, default=30000)
    ap.add_argument("--p", type=float, default=0.001)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--query", default="clique4")
    ap.add_argument("--variant", choices=("edge", "vertex"), default="edge")
    ap.add_argument("--strategy", default="eager")
    ap.add_argument("--workers", default="1,2,4,8")
    ap.add_argument("--nested-threshold", type=int, default=512)
    args = ap.parse_args()

    if bool(args.graph) == bool(args.gen):
        ap.error("give exactly one of --graph / --gen")
    if args.gen:
        g = build_csr(generate(args.gen, args.n, seed=args.seed, p=args.p, m=args.m))
    else:
        g = load_graph(args.graph)
    q = load_query(args.query)
    plan = compile_plan(q, build_schedule(q, variant=args.variant), args.strategy)
    print(f"graph: {g.vertex_count} vertices, {g.edge_count} edges; strategy {args.strategy}")

    counts = set()
    print(f"{'workers':<9}{'nested':<8}{'matches':>12}{'seconds':>10}{'speedup':>9}{'busy max/min':>16}")
    base = None
    for workers in (int(w) for w in args.workers.split(",")):
        for nested in (False, True):
            cfg = ExecConfig(workers=workers, nested=nested, nested_threshold=args.nested_threshold)
            st = execute_parallel(plan, g, config=cfg)
            counts.add(st.match_count)
            if base is None:
                base = st.elapsed_seconds
            busy = f"{max(st.busy_seconds):.2f}/{min(st.busy_seconds):.2f}" if st.busy_seconds else "-"
            print(
                f"{workers:<9}{str(nested).lower():<8}{st.match_count:>12}"
                f"{st.elapsed_seconds:>10.3f}{base / st.elapsed_seconds:>9.2f}{busy:>16}"
            )
    if len(counts) > 1:
        print("COUNT MISMATCH ACROSS CONFIGURATIONS", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
