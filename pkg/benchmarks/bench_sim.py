#!/usr/bin/env python3
"""Benchmark the compiled simulation kernel against the numpy fallback.

Runs the same configurations on both backends, checks that the outputs are
bit-identical, and reports wall time per run.

    python benchmarks/bench_sim.py [--repeats 3]
"""

import argparse
import time
import warnings

import numpy as np

from tailgap.prgsim import (BurnInWarning, PrgParams, SimConfig,
                            available_backends, simulate)

CASES = [
    # (label, n_firms, dt, burn_in, lam)
    ("small population", 500, 0.02, 30.0, 12.0),
    ("calibration scale", 5000, 1 / 60, 15.0, 12.0),
    ("full scale", 20000, 0.05, 150.0, 0.0),
]


def run_case(label, n0, dt, burn_in, lam, repeats):
    params = PrgParams(mu=0.09, sigma=0.17, h=0.08, nu=0.08 * n0,
                       lam=lam, epsilon=0.1)
    init = "steady" if burn_in < 100 else "ones"
    config = SimConfig(seed=7, n_firms_init=n0, dt=dt, burn_in=burn_in,
                       horizon=1.0, keep_top=min(2000, n0), init=init)
    timings = {}
    results = {}
    for backend in available_backends():
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            results[backend] = simulate(params, config, backend=backend)
            best = min(best, time.perf_counter() - t0)
        timings[backend] = best
    identical = ""
    if len(results) == 2:
        same = (np.array_equal(results["cython"].sizes_top,
                               results["numpy"].sizes_top)
                and results["cython"].shed_total == results["numpy"].shed_total)
        identical = "bit-identical" if same else "MISMATCH"
    return timings, identical


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3,
                        help="take the best of this many runs")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled kernel not built; timing the numpy fallback only")
    print(f"{'case':<20} {'n_firms':>8} {'steps':>7} "
          + "".join(f"{b:>12}" for b in backends)
          + ("   speedup  outputs" if len(backends) == 2 else ""))

    warnings.simplefilter("ignore", BurnInWarning)
    for label, n0, dt, burn_in, lam in CASES:
        timings, identical = run_case(label, n0, dt, burn_in, lam, args.repeats)
        steps = round((burn_in + 1.0) / dt)
        row = f"{label:<20} {n0:>8} {steps:>7}"
        for backend in backends:
            row += f"{timings[backend] * 1e3:>10.1f}ms"
        if len(backends) == 2:
            speedup = timings["numpy"] / timings["cython"]
            row += f"   {speedup:>6.2f}x  {identical}"
        print(row)


if __name__ == "__main__":
    main()
