#!/usr/bin/env python3
"""Time the hot kernels with numba enabled vs the pure-Python/numpy fallback.

Runs itself twice via subprocess with TOPICBENCH_NUMBA=1/0 and prints a
comparison table. Direct invocation with --mode runs one side.

    python benchmarks/bench_kernels.py [--n 600] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_one_mode(n: int, repeat: int) -> dict:
    from topicbench import kernels
    from topicbench.reduce import calibrate, knn_graph, make_epochs_per_sample

    rng = np.random.default_rng(0)
    points = rng.standard_normal((n, 8))
    k = 15
    kernels.warmup()  # compile (or no-op) outside the timed region

    results = {}

    def timed(name, fn):
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        results[name] = best

    timed("knn_brute", lambda: kernels.knn_brute(points, k))

    graph = knn_graph(points, k)
    rho = graph.distances[:, 0].copy()
    timed("smooth_knn_sigma",
          lambda: kernels.smooth_knn_sigma(graph.distances, rho, float(np.log2(k))))

    core = graph.distances[:, k - 1].copy()
    timed("prim_mst", lambda: kernels.prim_mst_mutual_reachability(points, core))

    calibrated = calibrate(graph, k)
    coo = calibrated.symmetric.tocoo()
    head = coo.row.astype(np.int64)
    tail = coo.col.astype(np.int64)
    n_epochs = 50
    eps = make_epochs_per_sample(coo.data, n_epochs)
    emb0 = rng.standard_normal((n, 2)) * 10

    def run_sgd():
        emb = emb0.copy()
        kernels.sgd_layout(emb, head, tail, eps.copy(), 1.6, 0.9, 1.0,
                           n_epochs, 5, 42)

    timed(f"sgd_layout({n_epochs} epochs)", run_sgd)
    return results


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=600, help="points per kernel")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--mode", choices=["numba", "numpy"], default=None,
                        help="run one side and emit JSON (used internally)")
    args = parser.parse_args()

    if args.mode:
        results = bench_one_mode(args.n, args.repeat)
        print(json.dumps(results))
        return 0

    sides = {}
    for mode, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, TOPICBENCH_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--mode", mode,
             "--n", str(args.n), "--repeat", str(args.repeat)],
            capture_output=True, text=True, env=env, check=True,
        )
        sides[mode] = json.loads(proc.stdout.strip().splitlines()[-1])

    width = max(len(k) for k in sides["numba"])
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name in sides["numba"]:
        jit = sides["numba"][name]
        plain = sides["numpy"][name]
        print(f"{name:<{width}}  {jit:>9.4f}s  {plain:>9.4f}s  {plain / jit:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
