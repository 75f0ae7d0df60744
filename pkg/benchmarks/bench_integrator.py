#!/usr/bin/env python3
"""Benchmark the compiled DOPRI5 core against the pure-Python twin.

Both backends run the same tableau, error norm and step controller, so
this measures the cost of the Python-level inner loop alone.  Workloads
mirror the toolkit's hot paths: long single transitions, kink-split
transitions of the scalar counterexample, and a fundamental-matrix grid
sweep like the one behind every dichotomy verification.

Usage: python benchmarks/bench_integrator.py [--repeats N] [--quick]
"""

import argparse
import time

import numpy as np

from hdicho.growth import growth_rate
from hdicho.integrate import available_backends
from hdicho.mathtools import geometric_grid
from hdicho.systems import make_builtin

RTOL, ATOL = 1e-10, 1e-12


def bench_case(step, coeff, tasks):
    t0 = time.perf_counter()
    total_steps = 0
    for a, b, n in tasks:
        _, stats = step(coeff, a, b, np.eye(n), RTOL, ATOL, np.inf)
        total_steps += stats["steps"]
    return time.perf_counter() - t0, total_steps


def split_tasks(system, pairs):
    """Expand (s, t) pairs into per-segment tasks split at the kinks."""
    n = system.dim
    tasks = []
    for s, t in pairs:
        cuts = sorted(b for b in system.breakpoints if min(s, t) < b < max(s, t))
        if t < s:
            cuts = cuts[::-1]
        path = [s] + cuts + [t]
        tasks.extend((a, b, n) for a, b in zip(path[:-1], path[1:]))
    return tasks


def build_workloads(quick):
    g_exp = growth_rate("exp")
    g_id = growth_rate("identity")
    diag = make_builtin("h_diagonal", g_exp, {"alpha": 1.0})
    counter = make_builtin("counterexample", g_id, {"ell": 0.5})
    demo = make_builtin("floquet_demo", g_id, {"alpha": 1.0})
    span = 10.0 if quick else 30.0
    sweep = geometric_grid(g_id, 1e-2, 1e2, 5 if quick else 15)
    return [
        ("long transition, 2x2 constant-coefficient", diag.coefficient,
         [(0.0, span, 2), (span, 0.0, 2)]),
        ("counterexample across both kinks, 1x1", counter.coefficient,
         split_tasks(counter, [(0.05, 20.0), (20.0, 0.05)])),
        ("fundamental sweep, 2x2 with 1/t coefficient", demo.coefficient,
         [(1.0, float(t), 2) for t in sweep]),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; benchmarking the pure backend only")
    workloads = build_workloads(args.quick)

    width = max(len(name) for name, _, _ in workloads)
    header = f"{'workload':<{width}}  " + "".join(f"{n:>12}" for n in backends) + "  speedup"
    print(header)
    print("-" * len(header))
    for name, coeff, tasks in workloads:
        times = {}
        for bname, step in backends.items():
            bench_case(step, coeff, tasks)  # warm-up
            best = min(
                bench_case(step, coeff, tasks)[0] for _ in range(args.repeats)
            )
            times[bname] = best
        row = f"{name:<{width}}  " + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in backends)
        if "compiled" in times and "python" in times:
            row += f"  x{times['python'] / times['compiled']:.1f}"
        print(row)


if __name__ == "__main__":
    main()
