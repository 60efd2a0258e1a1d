"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--capacity 200]

Each kernel is run on identical inputs through both backends; the script
checks the outputs agree before reporting the best-of-``repeat`` wall times.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from ps_sojourn import _fallback
from ps_sojourn.model import ModelParams, generator_matrix, initial_density

try:
    from ps_sojourn import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def cases(K: int, sims: int) -> dict:
    gen = generator_matrix(ModelParams(0.9, K))
    d = np.ascontiguousarray(gen.diag, dtype=float)
    e2 = np.ascontiguousarray(gen.sub * gen.sup, dtype=float)
    lo, hi = -(1 + np.sqrt(0.9)) ** 2 - 1.0, 0.0
    thetas = 0.5 + 1j * np.linspace(-20, 20, 64)
    rhs = initial_density(K)
    t = np.linspace(0.0, 5.0, 11)
    h = 0.01
    return {
        f"tridiag_eigvals K={K}": lambda m: m.tridiag_eigvals(d, e2, lo, hi, 1e-14),
        f"shifted_solve K={K} x64 shifts": lambda m: m.shifted_solve(thetas, gen.sub, gen.diag, gen.sup, rhs)[0],
        f"rk4_tridiag K={K} t<=5 h={h}": lambda m: m.rk4_tridiag(gen.sub, gen.diag, gen.sup, rhs, t, h),
        f"simulate_conditional {sims} reps": lambda m: m.simulate_conditional(0.9, 10, 3, 0, sims, 1),
    }


def best_time(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--capacity", type=int, default=200)
    parser.add_argument("--sims", type=int, default=20_000)
    args = parser.parse_args()
    if compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':<40} {'python [s]':>12} {'compiled [s]':>13} {'speed-up':>9}")
    for name, call in cases(args.capacity, args.sims).items():
        ref = np.asarray(call(_fallback))
        out = np.asarray(call(compiled))
        if not np.allclose(ref, out, rtol=1e-10, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        slow = best_time(lambda: call(_fallback), args.repeat)
        fast = best_time(lambda: call(compiled), args.repeat)
        print(f"{name:<40} {slow:>12.4f} {fast:>13.5f} {slow / fast:>8.0f}x")


if __name__ == "__main__":
    main()
