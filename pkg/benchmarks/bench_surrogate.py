"""Throughput comparison: compiled surrogate kernel vs pure-Python fallback.

Usage: python benchmarks/bench_surrogate.py [--evals N] [--k K] [--epistasis E]
"""

import argparse
import random
import time

from cellnas._core import BACKEND, fallback
from cellnas.genotype import random_code

try:
    from cellnas._core import _nkcore
except ImportError:
    _nkcore = None


def bench(fn, symbol_strings, epistasis):
    start = time.perf_counter()
    total = 0.0
    for i, symbols in enumerate(symbol_strings):
        total += fn(symbols, 1234, epistasis, i)
    elapsed = time.perf_counter() - start
    return elapsed, total


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--evals", type=int, default=20_000)
    parser.add_argument("--k", type=int, default=7)
    parser.add_argument("--epistasis", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(0)
    symbol_strings = []
    for _ in range(args.evals):
        code = random_code(args.k, rng)
        symbol_strings.append(bytes(code.layer_types) + bytes(code.connections))

    print(f"active backend: {BACKEND}")
    print(f"{args.evals} evaluations, k={args.k}, epistasis={args.epistasis}")

    py_time, py_sum = bench(fallback.nk_affinity, symbol_strings, args.epistasis)
    print(f"python   {args.evals / py_time:>12.0f} evals/s  ({py_time:.3f}s)")

    if _nkcore is None:
        print("compiled extension not built; run pip install -e . to compare")
        return

    cy_time, cy_sum = bench(_nkcore.nk_affinity, symbol_strings, args.epistasis)
    print(f"compiled {args.evals / cy_time:>12.0f} evals/s  ({cy_time:.3f}s)")
    print(f"speedup  {py_time / cy_time:>11.1f}x")
    assert py_sum == cy_sum, "backends disagree"


if __name__ == "__main__":
    main()
