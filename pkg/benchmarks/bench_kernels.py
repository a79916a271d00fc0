#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel backends on the hot scans.

Run:  python3 benchmarks/bench_kernels.py [--rows 2000000]
The same comparison is forced at runtime with KSDIOPH_BACKEND=numpy.
"""

import argparse
import itertools
import time

import numpy as np

from ksdioph import create_field
from ksdioph.kernels import get_backend


def bench_affine(backend, coords, E, X, Einv, offsets, repeats=3):
    backend.affine_min_scan(coords[:1000], E, X, Einv, offsets)  # warm JIT
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        backend.affine_min_scan(coords, E, X, Einv, offsets)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_content(backend, Y, repeats=3):
    backend.content_scan(Y[:1000])
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        backend.content_scan(Y)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=2_000_000)
    args = ap.parse_args()

    field = create_field([-2, 0, 1])
    rng = np.random.default_rng(0)
    m = 2
    coords = rng.integers(-40, 41, size=(args.rows, m * 2)).astype(np.int64)
    E = field._embed_f64
    Einv = field._inv_embed_f64
    X = rng.uniform(0, 1, size=(2, m))
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=2)),
                       dtype=np.int64)
    Y = rng.normal(size=(args.rows, 2, m + 1))

    rows = []
    for name in ("numpy", "numba"):
        try:
            backend = get_backend(name)
        except ImportError:
            print(f"{name}: unavailable")
            continue
        ta = bench_affine(backend, coords, E, X, Einv, offsets)
        tc = bench_content(backend, Y)
        rows.append((name, ta, tc))

    print(f"{'backend':<8} {'affine_min_scan':>16} {'content_scan':>14}  ({args.rows} rows)")
    for name, ta, tc in rows:
        print(f"{name:<8} {ta:>14.3f}s {tc:>12.3f}s")
    if len(rows) == 2:
        print(f"speedup  {rows[0][1] / rows[1][1]:>13.1f}x {rows[0][2] / rows[1][2]:>11.1f}x")


if __name__ == "__main__":
    main()
