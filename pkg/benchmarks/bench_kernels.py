#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Generates one large random pattern and times each coordinate-scan kernel on
both paths. The numba path is warmed up first so JIT compilation is not
billed to the measurement.

    python benchmarks/bench_kernels.py [--nnz 4000000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from sparseroof import _kernels


def make_pattern(rng, nrows, ncols, nnz):
    keys = rng.choice(nrows * ncols, size=nnz, replace=False)
    rows = (keys // ncols).astype(np.int64)
    cols = (keys % ncols).astype(np.int64)
    return rows, cols


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nrows", type=int, default=4096)
    ap.add_argument("--ncols", type=int, default=4096)
    ap.add_argument("--nnz", type=int, default=4_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    rows, cols = make_pattern(rng, args.nrows, args.ncols, args.nnz)
    keys = rows * np.int64(args.ncols) + cols
    b_h = b_w = 16
    m_group, n_keep = 4, 2

    impls = _kernels._load_numba()
    if impls is None:
        raise SystemExit("numba unavailable; nothing to compare")

    cases = {
        "count_occupied_blocks": (
            lambda: _kernels.count_occupied_blocks_np(rows, cols, b_h, b_w, args.ncols // b_w),
            lambda: impls["count_occupied_blocks"](rows, cols, b_h, b_w,
                                                   args.ncols // b_w, args.nrows // b_h),
        ),
        "first_duplicate": (
            lambda: _kernels.first_duplicate_np(keys),
            lambda: impls["first_duplicate"](keys, args.nrows * args.ncols),
        ),
        "first_nm_violation": (
            lambda: _kernels.first_nm_violation_np(rows, cols, n_keep, m_group,
                                                   args.ncols // m_group, args.nrows),
            lambda: impls["first_nm_violation"](rows, cols, n_keep, m_group,
                                                args.ncols // m_group, args.nrows),
        ),
    }

    print(f"pattern: {args.nrows}x{args.ncols}, nnz={args.nnz:,}  (best of {args.repeat})")
    print(f"{'kernel':<24} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, (np_fn, nb_fn) in cases.items():
        assert_equal_results(np_fn, nb_fn, name)
        nb_fn()  # warm-up / JIT compile
        t_np = bench(np_fn, args.repeat)
        t_nb = bench(nb_fn, args.repeat)
        print(f"{name:<24} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.2f}x")


def assert_equal_results(np_fn, nb_fn, name):
    a, b = np_fn(), nb_fn()
    a = tuple(int(x) for x in np.atleast_1d(a))
    b = tuple(int(x) for x in np.atleast_1d(b))
    if a != b:
        raise SystemExit(f"{name}: numpy {a} != numba {b}")


if __name__ == "__main__":
    main()
