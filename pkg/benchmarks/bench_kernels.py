"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --n 256 1000 --repeat 5

Both paths run in the same process; the jitted versions are warmed up once
before timing.
"""

import argparse
import time

import numpy as np

from latinfill import _kernels
from latinfill._accel import NUMBA_AVAILABLE
from latinfill.construct import build
from latinfill.verify import generate_pls


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n):
    grid, _ = build(n)
    cells = grid.cells
    partial = generate_pls(n, 0.05, 2.0 / n, seed=0).cells
    half = n // 2 if n % 2 == 0 else 0
    return {
        "latin_ok": (_kernels.latin_ok_jit, _kernels._latin_ok_np, (cells,)),
        "partial_ok": (_kernels.partial_ok_jit, _kernels._partial_ok_np, (partial,)),
        "partner_counts": (
            _kernels.partner_counts_jit,
            _kernels._partner_counts_np,
            (cells, grid.colpos, half),
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[128, 512, 1000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy path can run")
    print(f"{'kernel':<16}{'n':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for n in args.n:
        for name, (fast, slow, call_args) in cases(n).items():
            fast(*call_args)
            assert np.array_equal(np.asarray(fast(*call_args)), np.asarray(slow(*call_args)))
            t_fast = best_of(fast, call_args, args.repeat)
            t_slow = best_of(slow, call_args, args.repeat)
            print(f"{name:<16}{n:>6}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}")

    # the completion search has no vectorised form, so compare against the
    # interpreted loop on a small instance
    partial = np.zeros((7, 7), dtype=np.int64)
    order = np.arange(1, 8, dtype=np.int64)
    _kernels.complete_jit(partial.copy(), order, -1)
    t_fast = best_of(lambda: _kernels.complete_jit(partial.copy(), order, -1), (), args.repeat)
    t_slow = best_of(lambda: _kernels._complete_loop(partial.copy(), order, -1), (), args.repeat)
    print(f"{'complete_search':<16}{7:>6}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}")


if __name__ == "__main__":
    main()
