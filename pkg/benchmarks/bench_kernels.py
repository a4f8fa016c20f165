#!/usr/bin/env python3
"""Benchmark the JIT kernels against the pure-Python fallback.

Runs the hot paths twice: once as imported (numba JIT by default) and once
in a subprocess with FRACD2D_DISABLE_NUMBA=1.  Usage:

    python benchmarks/bench_kernels.py            # full comparison
    python benchmarks/bench_kernels.py --inner    # one timing pass (internal)

The fallback pass uses a scaled-down workload (the interpreted loops are
orders of magnitude slower); throughputs are normalized per unit of work.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _workloads(scale):
    from fracd2d import fractal_graph, spatial_grid, sympoly, traffic

    n = max(200, int(2000 * scale))
    trials = max(200, int(20000 * scale))
    params = fractal_graph.FractalParams(n=n, gamma=2.5, epsilon=2.5, seed=1)

    def bench_build():
        fractal_graph.generate(params)
        return n * n

    _, graph = fractal_graph.generate(params)
    layout = spatial_grid.place_nodes(n, 1)
    grid = spatial_grid.grid_config(n)

    def bench_esp():
        w = np.linspace(0.1, 3.0, max(300, int(3000 * scale)))
        sympoly.esp_all(w, min(200, w.size))
        return w.size * min(200, w.size)

    def bench_analytic():
        sympoly.analytic_hops_uniform(graph, layout, grid)
        return n * n

    def bench_mc_uniform():
        traffic.estimate_mean_hops(graph, layout, grid,
                                   traffic.TrafficModel(rule="uniform"),
                                   trials, 1)
        return trials * n

    def bench_mc_powerlaw():
        traffic.estimate_mean_hops(graph, layout, grid,
                                   traffic.TrafficModel(rule="powerlaw", beta=2.5),
                                   trials, 1)
        return trials * n

    def bench_levels():
        fractal_graph.mean_level_degrees(graph, 4)
        return n * n

    return [("graph_build", bench_build), ("esp_table", bench_esp),
            ("analytic_hops", bench_analytic), ("mc_uniform", bench_mc_uniform),
            ("mc_powerlaw", bench_mc_powerlaw), ("level_sums", bench_levels)]


def run_inner(scale):
    from fracd2d import NUMBA_ENABLED

    results = {"numba": NUMBA_ENABLED, "scale": scale, "timings": {}}
    for name, fn in _workloads(scale):
        fn()  # warm (JIT compile)
        t0 = time.perf_counter()
        work = fn()
        dt = time.perf_counter() - t0
        results["timings"][name] = {"seconds": dt, "work": work}
    print(json.dumps(results))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true")
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    if args.inner:
        run_inner(args.scale)
        return

    def run(disable, scale):
        env = dict(os.environ)
        if disable:
            env["FRACD2D_DISABLE_NUMBA"] = "1"
        else:
            env.pop("FRACD2D_DISABLE_NUMBA", None)
        res = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner",
             "--scale", str(scale)],
            capture_output=True, text=True, env=env)
        if res.returncode != 0:
            raise RuntimeError(res.stderr)
        return json.loads(res.stdout.strip().splitlines()[-1])

    fast = run(False, 1.0)
    slow = run(True, 0.05)
    print(f"{'kernel':<16} {'jit (s)':>10} {'fallback (s)':>13} "
          f"{'work ratio':>11} {'speedup':>9}")
    print("-" * 64)
    for name in fast["timings"]:
        f = fast["timings"][name]
        s = slow["timings"][name]
        work_ratio = f["work"] / s["work"]
        # normalize to the same amount of work
        speedup = (s["seconds"] * work_ratio) / f["seconds"]
        print(f"{name:<16} {f['seconds']:>10.3f} {s['seconds']:>13.3f} "
              f"{work_ratio:>11.1f} {speedup:>8.1f}x")


if __name__ == "__main__":
    main()
