#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Times the two hot inner loops (MM descent step and the fixed-diagonal PSD
ADMM) at the default problem scale and prints per-iteration costs plus the
speedup. BLAS is pinned to one thread, matching how the solvers run.

Usage: python benchmarks/bench_kernels.py [--mm-iters N] [--admm-reps N]
"""

import argparse
import time

import numpy as np

from radcomopt._threads import single_thread_blas
from radcomopt._kernels import fallback

try:
    from radcomopt._kernels import _core
except ImportError:
    _core = None


def mm_problem(rng, n_t=16, n_users=4):
    n = n_t * n_users
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q = 0.5 * (a + a.conj().T)
    q = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    p0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    rows = p0.reshape(n_users, n_t)
    rows /= np.sqrt(np.sum(np.abs(rows) ** 2, axis=0))
    lam = float(np.linalg.eigvalsh(Q)[-1])
    return Q, q, rows.reshape(-1), lam


def admm_problem(rng, n=8, diag=6.25):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    B = 0.5 * (g + g.conj().T)
    B *= diag * n / np.linalg.norm(B)
    return B, diag * np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex)


def bench_mm(impl, problem, iters, reps=5):
    Q, q, p0, lam = problem
    n_t, n_users = 16, 4
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        _, _, n_done, _, _ = impl.mm_inner(Q, q, p0, n_t, n_users, lam, 1.0,
                                           0.0, iters)
        best = min(best, (time.perf_counter() - t0) / n_done)
    return best


def bench_admm(impl, problem, reps):
    B, Y0, U0 = problem
    best = np.inf
    iters_done = 0
    for _ in range(reps):
        t0 = time.perf_counter()
        _, _, _, iters_done, _, _, _ = impl.admm_linear_fixed_diag(
            B, 6.25, 1.0, 1e-8, 20000, Y0, U0)
        best = min(best, (time.perf_counter() - t0) / iters_done)
    return best, iters_done


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mm-iters", type=int, default=5000)
    parser.add_argument("--admm-reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    mm = mm_problem(rng)
    admm = admm_problem(rng)

    print(f"{'kernel':<28} {'python':>12} {'cython':>12} {'speedup':>9}")
    with single_thread_blas():
        py_mm = bench_mm(fallback, mm, args.mm_iters)
        row = [f"{'mm step (64-dim)':<28}", f"{py_mm * 1e6:>10.2f}us"]
        if _core is not None:
            cy_mm = bench_mm(_core, mm, args.mm_iters)
            row += [f"{cy_mm * 1e6:>10.2f}us", f"{py_mm / cy_mm:>8.1f}x"]
        else:
            row += [f"{'(not built)':>12}", f"{'-':>9}"]
        print(" ".join(row))

        py_admm, its = bench_admm(fallback, admm, args.admm_reps)
        row = [f"{'admm iteration (8x8)':<28}", f"{py_admm * 1e6:>10.2f}us"]
        if _core is not None:
            cy_admm, _ = bench_admm(_core, admm, args.admm_reps)
            row += [f"{cy_admm * 1e6:>10.2f}us", f"{py_admm / cy_admm:>8.1f}x"]
        else:
            row += [f"{'(not built)':>12}", f"{'-':>9}"]
        print(" ".join(row))
        print(f"(admm converged in {its} iterations at tol 1e-8)")
    if _core is None:
        print("compiled extension not built; install with "
              "`pip install -e . --no-build-isolation` to compare")


if __name__ == "__main__":
    main()
