"""Benchmark the compiled tridiagonal kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 64,256,1024] [--batch 2048]
"""

import argparse
import time

import numpy as np

from helmgreen._kernels import BACKEND, pure

try:
    from helmgreen._kernels import _fast
except ImportError:
    _fast = None


def _problem(rng, n, batch):
    offdiag = np.full(n - 1, 1.0 + 0.0j)
    diag = (
        rng.standard_normal((batch, n)) + 1j * (3.0 + rng.random((batch, n)))
    ).astype(np.complex128)
    rhs = (rng.standard_normal((batch, n)) + 1j * rng.standard_normal((batch, n)))
    return offdiag, diag, rhs.astype(np.complex128)


def _time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="64,256,1024")
    parser.add_argument("--batch", type=int, default=2048)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"import-time backend selection: {BACKEND}")
    if _fast is None:
        print("compiled extension unavailable; timing the pure path only")
    print(f"{'N':>6} {'batch':>6} {'pure [ms]':>10} {'fast [ms]':>10} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        offdiag, diag, rhs = _problem(rng, n, args.batch)
        t_pure, x_pure = _time(
            lambda: pure.tridiag_solve_batch(offdiag, offdiag, diag, rhs)
        )
        if _fast is not None:
            t_fast, x_fast = _time(
                lambda: _fast.tridiag_solve_batch(offdiag, offdiag, diag, rhs)
            )
            err = np.max(np.abs(x_fast - x_pure)) / np.max(np.abs(x_pure))
            assert err < 1e-12, f"backend mismatch: {err}"
            print(f"{n:>6} {args.batch:>6} {t_pure * 1e3:>10.2f} "
                  f"{t_fast * 1e3:>10.2f} {t_pure / t_fast:>8.2f}x")
        else:
            print(f"{n:>6} {args.batch:>6} {t_pure * 1e3:>10.2f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
