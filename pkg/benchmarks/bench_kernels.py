#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

The package picks the numba path automatically when numba imports (set
SCHOUTEN_NO_NUMBA=1 to force numpy); this script times both implementations
side by side on the hot workloads:

  elementary_symmetric  batched prefix recurrence
  gamma_member          batched cone membership
  gamma_margin          batched diagonal-ray bisection
  radial_sphere_eigs    radial Schouten eigenvalue assembly

Usage: python benchmarks/bench_kernels.py [--rows 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from schouten._kernels import IMPLEMENTATIONS


def best_of(fn, args, repeat):
    fn(*args)  # warm-up (numba compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n = 6
    lam_inside = rng.uniform(0.05, 2.0, (args.rows, n))
    lam_mixed = rng.standard_normal((args.rows, n))
    u = rng.uniform(0.5, 2.0, args.rows)
    up = rng.standard_normal(args.rows)
    upp = rng.standard_normal(args.rows)
    cot = rng.standard_normal(args.rows)
    pole = np.zeros(args.rows, dtype=bool)

    cases = [
        ("elementary_symmetric", (lam_mixed, n)),
        ("gamma_member", (lam_mixed, 3)),
        ("gamma_margin", (lam_inside, 3)),
        ("radial_sphere_eigs", (u, up, upp, cot, pole, 4.0)),
    ]

    numba_impls = IMPLEMENTATIONS["numba"]
    if numba_impls is None:
        print("numba unavailable; timing the numpy fallback only")

    print(f"{args.rows} rows, best of {args.repeat}")
    header = f"{'kernel':<22}{'numpy':>12}{'numba':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, case_args in cases:
        t_np = best_of(IMPLEMENTATIONS["numpy"][name], case_args, args.repeat)
        if numba_impls is not None:
            t_nb = best_of(numba_impls[name], case_args, args.repeat)
            print(f"{name:<22}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms"
                  f"{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<22}{t_np * 1e3:>10.2f}ms{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
