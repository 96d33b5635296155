"""Compare the numpy and numba kernel backends on realistic workloads.

Times the four hot kernels (odd polynomial evaluation, its derivative,
the safeguarded Newton inverse, and the orthonormal recurrence sweep) on
large point batches and prints a speedup table.  Also cross-checks that
both backends return bit-identical results, so a run doubles as a
backend-agreement smoke test.

Run:  python3 benchmarks/bench_kernels.py [--size N] [--repeats K]
"""

import argparse
import time

import numpy as np

from mappedpce import _kernels
from mappedpce.orthopoly import legendre_recurrence

# degree-9 stretch map in raw kernel form
COEFFS = np.array([40320.0, 6720.0, 3024.0, 1800.0, 1225.0])
SCALE = 53089.0
NEWTON_TOL = 1e-14
NEWTON_MAXIT = 100


def _workloads(size, degree, rng):
    s = rng.uniform(-1.0, 1.0, size)
    y = rng.uniform(-1.0, 1.0, size)
    rec = legendre_recurrence(degree)
    return {
        "odd_poly_eval": (COEFFS, SCALE, s),
        "odd_poly_deriv": (COEFFS, SCALE, s),
        "odd_poly_inverse": (COEFFS, SCALE, y, NEWTON_TOL, NEWTON_MAXIT),
        "recurrence_eval": (rec.alpha, rec.sqrt_beta, degree + 1, s),
    }


def _time(func, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=200_000,
                        help="points per kernel call (default 200000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best-of (default 5)")
    parser.add_argument("--degree", type=int, default=20,
                        help="recurrence sweep degree (default 20)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    numpy_backend = _kernels.get_backend("numpy")
    try:
        numba_backend = _kernels.get_backend("numba")
    except RuntimeError as exc:
        parser.exit(1, f"cannot benchmark: {exc}\n")

    rng = np.random.default_rng(args.seed)
    work = _workloads(args.size, args.degree, rng)

    # first numba call per kernel pays for JIT/cache load; do it off the clock
    for name, call_args in work.items():
        numba_backend[name](*call_args)

    print(f"size={args.size}  repeats={args.repeats}  degree={args.degree}")
    print(f"{'kernel':<18} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}  agree")
    for name, call_args in work.items():
        ref = numpy_backend[name](*call_args)
        jit = numba_backend[name](*call_args)
        agree = "bit" if np.array_equal(ref, jit) else f"{np.max(np.abs(ref - jit)):.1e}"
        t_np = _time(numpy_backend[name], call_args, args.repeats) * 1e3
        t_nb = _time(numba_backend[name], call_args, args.repeats) * 1e3
        print(f"{name:<18} {t_np:>12.3f} {t_nb:>12.3f} {t_np / t_nb:>8.2f}x  {agree}")


if __name__ == "__main__":
    main()
