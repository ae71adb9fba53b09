"""Benchmark the compiled simplex pivot kernel against the numpy fallback.

Times raw pivot throughput on dense tableaus and end-to-end LP solves on
random instances, under whichever kernels are importable.  Run:

    python benchmarks/bench_lp_kernel.py
"""
import os
import subprocess
import sys
import time

import numpy as np


def bench_pivots(kernel, sizes=((50, 80), (200, 300), (500, 800)),
                 repeats=200):
    out = []
    rng = np.random.default_rng(0)
    for m, n in sizes:
        t = rng.normal(size=(m, n))
        cols = rng.integers(0, n, size=repeats)
        rows = rng.integers(0, m, size=repeats)
        t0 = time.perf_counter()
        for r, c in zip(rows, cols):
            if abs(t[r, c]) < 1e-6:
                t[r, c] = 1.0
            kernel.pivot(t, int(r), int(c))
        dt = time.perf_counter() - t0
        out.append((m, n, repeats / dt))
    return out


def bench_solves():
    from mtlmas.milp import EQ, GE, LE
    from mtlmas.milp.simplex import KERNEL, solve_lp

    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    iters = 0
    for _ in range(120):
        n = int(rng.integers(4, 30))
        m = int(rng.integers(4, 30))
        bounds = [(float(rng.integers(-4, 1)), float(rng.integers(1, 9)))
                  for _ in range(n)]
        rows = []
        for _ in range(m):
            coefs = {j: float(rng.integers(-3, 4)) for j in range(n)
                     if rng.integers(0, 2)}
            if not coefs:
                coefs = {0: 1.0}
            rows.append((coefs, (LE, GE, EQ)[int(rng.integers(0, 3))],
                         float(rng.integers(-6, 7))))
        c = {j: float(rng.integers(-5, 6)) for j in range(n)}
        res = solve_lp(bounds, rows, c, n)
        iters += res.iterations
    return KERNEL, time.perf_counter() - t0, iters


def main():
    from mtlmas.milp import _pivot_py
    kernels = {"numpy": _pivot_py}
    try:
        from mtlmas.milp import _pivot_cy
        kernels["compiled"] = _pivot_cy
    except ImportError:
        print("compiled kernel not built; run `python setup.py build_ext "
              "--inplace` to compare")

    print("pivot throughput (pivots/second):", flush=True)
    print(f"{'tableau':>12} " + " ".join(f"{k:>12}" for k in kernels))
    results = {k: bench_pivots(mod) for k, mod in kernels.items()}
    for i, (m, n, _) in enumerate(results["numpy"]):
        row = f"{m}x{n:<8}"
        cells = " ".join(f"{results[k][i][2]:12.0f}" for k in kernels)
        print(f"{row:>12} {cells}")

    print("\nend-to-end LP solves (120 random instances):", flush=True)
    for env_flag in (None, "1"):
        env = dict(os.environ)
        if env_flag:
            env["MTLMAS_FORCE_PY_KERNEL"] = env_flag
        elif "MTLMAS_FORCE_PY_KERNEL" in env:
            del env["MTLMAS_FORCE_PY_KERNEL"]
        code = ("import benchmarks.bench_lp_kernel as b; "
                "k, dt, it = b.bench_solves(); "
                "print(f'{k:>10}: {dt:.3f}s total, {it} simplex iterations')")
        subprocess.run([sys.executable, "-c", code], env=env, check=True,
                       cwd=os.path.dirname(os.path.dirname(
                           os.path.abspath(__file__))))


if __name__ == "__main__":
    main()
