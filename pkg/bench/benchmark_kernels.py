#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel lanes on the hot walk loops.

Usage:
    python bench/benchmark_kernels.py [--walks N] [--steps N]

The production lane is selected at import time via RMSIM_NO_NUMBA; here both
lane modules are imported directly so one process can time both.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rmsim import _kernels_numpy


def _time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--walks", type=int, default=100_000)
    parser.add_argument("--steps", type=int, default=128)
    parser.add_argument("--plane-steps", type=int, default=2_000_000)
    args = parser.parse_args()

    try:
        from rmsim import _kernels_numba
        lanes = [("numpy", _kernels_numpy), ("numba", _kernels_numba)]
    except ImportError:
        print("numba unavailable; timing the numpy lane only")
        lanes = [("numpy", _kernels_numpy)]

    rng = np.random.default_rng(0)
    rows = []

    inc = rng.standard_normal((args.walks, args.steps))
    for name, lane in lanes:
        lane.first_passage_below(inc[:64])  # warm up / compile
        dt = _time(lambda: lane.first_passage_below(inc))
        rows.append((f"first_passage_below ({args.walks}x{args.steps})", name, dt))

    n = args.plane_steps
    inc_tau = 0.01 + 0.05 * rng.standard_normal(n)
    inc_s = 0.3 * rng.standard_normal(n)
    tau_out = np.empty(n + 1)
    s_out = np.empty(n + 1)
    det_steps = np.empty(n, dtype=np.int64)
    det_taus = np.empty(n)
    for name, lane in lanes:
        lane.plane_walk(
            0.0, 0.5, inc_tau[:64], inc_s[:64], -1.0, 0.5,
            tau_out[:65], s_out[:65], det_steps, det_taus,
        )
        dt = _time(
            lambda: lane.plane_walk(
                0.0, 0.5, inc_tau, inc_s, -1.0, 0.5,
                tau_out, s_out, det_steps, det_taus,
            )
        )
        rows.append((f"plane_walk ({n} steps)", name, dt))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  lane    best time")
    for kernel, name, dt in rows:
        print(f"{kernel:<{width}}  {name:<6}  {dt * 1e3:8.2f} ms")
    by_kernel: dict[str, dict[str, float]] = {}
    for kernel, name, dt in rows:
        by_kernel.setdefault(kernel, {})[name] = dt
    for kernel, times in by_kernel.items():
        if "numba" in times and "numpy" in times:
            print(f"{kernel}: numba speedup x{times['numpy'] / times['numba']:.1f}")


if __name__ == "__main__":
    main()
