"""Benchmark the compiled join kernel against the pure-Python fallback.

Runs the same randomized workloads through both backends, checks that the
outputs are byte-identical, and reports best-of-N wall times with the
speedup of the compiled extension.

Usage:
    python3 benchmarks/bench_kernel.py [--sizes 1000,10000,100000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from linkalign._kernel import get_backend


def make_workload(rng, name, n):
    """Build (left, right, left_keys, right_keys, right_carry) rows tables."""
    if name == "one-key":
        # Uniform keys over n//2 values: about two matches per right row.
        left = np.stack(
            [rng.integers(0, max(1, n // 2), n), rng.integers(0, 1 << 20, n)], axis=1
        ).astype(np.int64)
        right = np.stack(
            [rng.integers(0, max(1, n // 2), n), rng.integers(0, 1 << 20, n)], axis=1
        ).astype(np.int64)
        return left, right, (0,), (0,), (1,)
    if name == "two-keys":
        # Composite keys with low hit rate: hashing dominates.
        left = rng.integers(0, max(1, n // 4), (n, 3)).astype(np.int64)
        right = rng.integers(0, max(1, n // 4), (n, 3)).astype(np.int64)
        return left, right, (0, 1), (1, 0), (2,)
    if name == "fanout":
        # 64 distinct keys: every probe fans out, output dominates.
        m = min(n, 4096)
        left = np.stack(
            [rng.integers(0, 64, m), rng.integers(0, 1 << 20, m)], axis=1
        ).astype(np.int64)
        right = np.stack(
            [rng.integers(0, 64, m), rng.integers(0, 1 << 20, m)], axis=1
        ).astype(np.int64)
        return left, right, (0,), (0,), (1,)
    raise ValueError(name)


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - started)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1000,10000,100000")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",") if s]

    try:
        compiled_name, compiled_join = get_backend("compiled")
    except ImportError:
        print("compiled kernel is not built; nothing to compare", file=sys.stderr)
        return 1
    python_name, python_join = get_backend("python")

    rng = np.random.default_rng(args.seed)
    header = f"{'workload':<10} {'rows':>8} {'out rows':>9} {python_name + ' ms':>12} {compiled_name + ' ms':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in ("one-key", "two-keys", "fanout"):
        for n in sizes:
            workload = make_workload(rng, name, n)
            py_s, py_out = best_of(python_join, workload, args.repeats)
            c_s, c_out = best_of(compiled_join, workload, args.repeats)
            if not np.array_equal(py_out, c_out):
                print(f"{name} at n={n}: backends disagree", file=sys.stderr)
                return 1
            print(
                f"{name:<10} {workload[0].shape[0]:>8} {py_out.shape[0]:>9}"
                f" {py_s * 1e3:>12.2f} {c_s * 1e3:>12.2f} {py_s / c_s:>7.1f}x"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
