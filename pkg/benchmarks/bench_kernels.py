#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py
The numba columns include a warm-up call so JIT compilation is not timed.
"""

import time

import numpy as np

from clauserank._accel import HAS_NUMBA
from clauserank._kernels import implementations


def _time(fn, args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_bt(n, comparisons, rng):
    n_mat = np.zeros((n, n))
    wins = np.zeros(n)
    strengths = 1.3 ** np.arange(n)
    for _ in range(comparisons):
        i, j = rng.choice(n, size=2, replace=False)
        p = strengths[i] / (strengths[i] + strengths[j])
        w, l = (i, j) if rng.random() < p else (j, i)
        n_mat[w, l] += 1
        n_mat[l, w] += 1
        wins[w] += 1
    wins += 0.05
    n_mat += 0.1 * (1 - np.eye(n))
    return lambda fn: _time(fn, (n_mat.copy(), wins.copy(), 1e-8, 10000))


def bench_pagerank(n, rng):
    w = rng.random((n, n))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    out = w.sum(axis=1)
    return lambda fn: _time(fn, (w, out, 0.85, 1e-10, 200))


def bench_jacobi(m, n, rng):
    a = rng.normal(size=(m, n))

    def run(fn):
        def call(b_src, tol, sweeps):
            b = b_src.copy()
            v = np.eye(b.shape[1])
            fn(b, v, tol, sweeps)

        return _time(call, (a, 1e-12, 60))

    return run


def main():
    rng = np.random.default_rng(0)
    impls = implementations()
    rows = []

    cases = [
        ("bt_mm n=50, 5k comps", "bt_mm", bench_bt(50, 5000, rng)),
        ("bt_mm n=300, 45k comps", "bt_mm", bench_bt(300, 45000, rng)),
        ("pagerank n=50", "pagerank", bench_pagerank(50, rng)),
        ("pagerank n=400", "pagerank", bench_pagerank(400, rng)),
        ("jacobi 200x40", "jacobi_sweeps", bench_jacobi(200, 40, rng)),
        ("jacobi 500x80", "jacobi_sweeps", bench_jacobi(500, 80, rng)),
    ]

    for label, kernel, runner in cases:
        accel, fallback = impls[kernel]
        if HAS_NUMBA:
            runner(accel)  # warm-up: compile outside the timed region
        t_accel = runner(accel)
        t_numpy = runner(fallback)
        speedup = t_numpy / t_accel if t_accel > 0 else float("inf")
        rows.append((label, t_accel, t_numpy, speedup))

    name = "numba" if HAS_NUMBA else "loops"
    print(f"{'case':<28} {name:>12} {'numpy':>12} {'speedup':>9}")
    for label, ta, tn, s in rows:
        print(f"{label:<28} {ta * 1e3:>10.2f}ms {tn * 1e3:>10.2f}ms {s:>8.1f}x")
    if not HAS_NUMBA:
        print("\nnumba not active (CLAUSERANK_NUMBA=0 or not installed): loop path is uncompiled")


if __name__ == "__main__":
    main()
