#!/usr/bin/env python3
"""Benchmark the counting pipeline on the knapsack reference instances.

Runs the standard instance family (feasible small, infeasible large,
five-weight zero and its x1001 scaling) plus any extra instance given on
the command line, reports value, direction, term counts and wall time,
and cross-checks the small ones against dynamic programming.

    python3 scripts/run_knapsack.py
    python3 scripts/run_knapsack.py --a0 123456 --weights 11,23,57,101
"""

import argparse
import time

from cteuclid.bruteforce import OracleRefusal, dp_knapsack
from cteuclid.engine import Stats
from cteuclid.problems import DiophantineSystem, run_pipeline

REFERENCE = [
    (41, [1, 5, 14]),
    (149389505, [12223, 12224, 36671]),
    (89643481, [12223, 12224, 36674, 61119, 85569]),
    (89643481 * 1001, [12223, 12224, 36674, 61119, 85569]),
]


def run_one(a0, weights, seed):
    stats = Stats()
    t0 = time.perf_counter()
    out = run_pipeline(
        DiophantineSystem([list(weights)], [a0]), "count", seed=seed, stats=stats
    )
    wall = time.perf_counter() - t0
    try:
        check = dp_knapsack(a0, weights)
        verdict = "ok" if check == out.value else f"MISMATCH (dp says {check})"
    except OracleRefusal:
        verdict = "instance too large for the dp oracle"
    lam = ",".join(f"{k}={v}" for k, v in sorted(out.lam.items()))
    print(f"a0={a0} weights={','.join(map(str, weights))}")
    print(f"  count      {out.value}")
    print(f"  check      {verdict}")
    print(f"  direction  {lam}")
    print(f"  terms      {stats.raw_terms} raw / {stats.collected_terms} collected, "
          f"{stats.euclid_nodes} recursion nodes")
    print(f"  wall       {wall:.3f} s")
    return out.value


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a0", type=int, default=None)
    ap.add_argument("--weights", default=None,
                    help="comma-separated positive weights")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if (args.a0 is None) != (args.weights is None):
        ap.error("--a0 and --weights go together")
    if args.a0 is not None:
        run_one(args.a0, [int(w) for w in args.weights.split(",")], args.seed)
        return

    for a0, ws in REFERENCE:
        run_one(a0, ws, args.seed)
        print()


if __name__ == "__main__":
    main()
