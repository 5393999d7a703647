#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths (conductivity root solves, energy-density
quadrature, and one implicit 2D solver step) on both backends in-process.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from forchflow import _accel
from forchflow import _kernels_numpy


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(impl, repeat):
    rng = np.random.default_rng(42)
    alphas = np.array([0.0, 1.0, 2.0])
    coeffs = np.array([1.0, 1.0, 1.0])
    xi = 10.0 ** rng.uniform(-4, 6, 200_000)
    xi_small = xi[:2_000]

    impl.conductivity(alphas, coeffs, xi[:10])  # warm (jit compile)
    impl.h_quad(alphas, coeffs, xi_small[:10], 1e-9)

    results = {}
    results["conductivity (200k)"] = _best_of(lambda: impl.conductivity(alphas, coeffs, xi), repeat)
    results["h_quad (2k)"] = _best_of(lambda: impl.h_quad(alphas, coeffs, xi_small, 1e-9), repeat)

    nx = ny = 96
    wx = rng.uniform(0.5, 2.0, (nx - 1, ny))
    wy = rng.uniform(0.5, 2.0, (nx, ny - 1))
    rhs = rng.standard_normal((nx, ny))
    impl.cg_solve(100.0, wx, wy, rhs, 1e-12, 10000)
    results["cg_solve (96x96)"] = _best_of(
        lambda: impl.cg_solve(100.0, wx, wy, rhs, 1e-12, 10000), repeat
    )
    return results


def bench_solver_step(repeat):
    """One full implicit step on a 64x64 grid per backend via env restart is
    awkward in-process; instead time the dominant per-step composite: face
    conductivity + CG solve back to back."""
    out = {}
    impls = [("numpy", _kernels_numpy)]
    if _accel.NUMBA_AVAILABLE:
        from forchflow import _kernels_numba

        impls.append(("numba", _kernels_numba))
    rng = np.random.default_rng(3)
    alphas = np.array([0.0, 1.0])
    coeffs = np.array([1.0, 1.0])
    mags = 10.0 ** rng.uniform(-2, 2, 2 * 64 * 63)
    nx = ny = 64
    wx = rng.uniform(0.5, 2.0, (nx - 1, ny))
    wy = rng.uniform(0.5, 2.0, (nx, ny - 1))
    rhs = rng.standard_normal((nx, ny))
    for name, impl in impls:
        impl.conductivity(alphas, coeffs, mags[:10])
        impl.cg_solve(100.0, wx, wy, rhs, 1e-12, 10000)

        def step(impl=impl):
            impl.conductivity(alphas, coeffs, mags)
            impl.cg_solve(100.0, wx, wy, rhs, 1e-12, 10000)

        out[name] = _best_of(step, repeat)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    impls = [("numpy", _kernels_numpy)]
    if _accel.NUMBA_AVAILABLE:
        from forchflow import _kernels_numba

        impls.append(("numba", _kernels_numba))
    else:
        print("numba unavailable: only the numpy fallback is timed")

    all_results = {name: bench_backend(impl, args.repeat) for name, impl in impls}
    keys = list(next(iter(all_results.values())).keys())
    width = max(len(k) for k in keys) + 2
    header = "kernel".ljust(width) + "".join(name.rjust(12) for name in all_results)
    if len(all_results) == 2:
        header += "speedup".rjust(12)
    print(header)
    for k in keys:
        row = k.ljust(width)
        vals = [all_results[name][k] for name in all_results]
        row += "".join(f"{v*1e3:9.2f} ms" for v in vals)
        if len(vals) == 2:
            row += f"{vals[0]/vals[1]:11.1f}x"
        print(row)

    step = bench_solver_step(args.repeat)
    print()
    print("implicit-step composite (64x64 face K + CG):")
    for name, v in step.items():
        print(f"  {name}: {v*1e3:.2f} ms")


if __name__ == "__main__":
    main()
