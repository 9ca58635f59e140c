"""Benchmark the numba kernels against the numpy fallback path.

Usage:
    python benchmarks/bench_kernels.py [--pairs N]

The same comparison can be forced package-wide by setting
SIMULKIT_NO_NUMBA=1, which makes simulkit run entirely on the fallback.
"""

import argparse
import time

import numpy as np

from simulkit._kernels import (
    NUMBA_AVAILABLE,
    edit_distance_numba,
    edit_distance_numpy,
    jaro_winkler_numba,
    jaro_winkler_numpy,
)


def make_pairs(rng, n_pairs, lo, hi, alphabet):
    pairs = []
    for _ in range(n_pairs):
        a = rng.integers(0, alphabet, size=rng.integers(lo, hi)).astype(np.int64)
        b = rng.integers(0, alphabet, size=rng.integers(lo, hi)).astype(np.int64)
        pairs.append((a, b))
    return pairs


def bench(fn, pairs):
    fn(*pairs[0])  # warm-up / JIT
    start = time.perf_counter()
    sink = 0.0
    for a, b in pairs:
        sink += fn(a, b)
    elapsed = time.perf_counter() - start
    return elapsed, sink


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=5000,
                        help="number of random input pairs per workload")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    workloads = [
        ("edit_distance, word-length (5-20 tokens)",
         edit_distance_numba, edit_distance_numpy,
         make_pairs(rng, args.pairs, 5, 20, 50)),
        ("edit_distance, utterance-length (40-160 chars)",
         edit_distance_numba, edit_distance_numpy,
         make_pairs(rng, max(args.pairs // 5, 1), 40, 160, 30)),
        ("jaro_winkler (4-16 chars)",
         jaro_winkler_numba, jaro_winkler_numpy,
         make_pairs(rng, args.pairs, 4, 16, 26)),
    ]

    print(f"{'workload':<48} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for name, fast, slow, pairs in workloads:
        slow_t, slow_sink = bench(slow, pairs)
        if not NUMBA_AVAILABLE:
            print(f"{name:<48} {'n/a':>10} {slow_t:>9.3f}s {'':>9}")
            continue
        fast_t, fast_sink = bench(fast, pairs)
        assert abs(fast_sink - slow_sink) < 1e-6, "kernel variants disagree"
        print(f"{name:<48} {fast_t:>9.3f}s {slow_t:>9.3f}s {slow_t / fast_t:>8.1f}x")


if __name__ == "__main__":
    main()
