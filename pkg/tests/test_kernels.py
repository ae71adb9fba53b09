"""Compiled vs fallback pivot kernel equivalence."""
import numpy as np
import pytest

from mtlmas.milp import _pivot_py

cy = pytest.importorskip("mtlmas.milp._pivot_cy",
                         reason="compiled kernel not built")


def test_pivot_bitwise_identical():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m, n = int(rng.integers(2, 12)), int(rng.integers(2, 12))
        t1 = rng.normal(size=(m, n))
        r = int(rng.integers(0, m))
        c = int(rng.integers(0, n))
        if abs(t1[r, c]) < 1e-3:
            t1[r, c] = 1.0
        t2 = t1.copy()
        _pivot_py.pivot(t1, r, c)
        cy.pivot(t2, r, c)
        assert np.array_equal(t1, t2)  # exact, not approx


def test_entering_identical():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        cost = rng.normal(size=n)
        allowed = (rng.uniform(size=n) < 0.8).astype(np.uint8)
        assert (_pivot_py.entering_bland(cost, allowed, 1e-9)
                == cy.entering_bland(cost, allowed, 1e-9))


def test_leaving_identical():
    rng = np.random.default_rng(2)
    for _ in range(200):
        m = int(rng.integers(1, 30))
        col = rng.normal(size=m)
        rhs = np.abs(rng.normal(size=m))
        basis = rng.permutation(m).astype(np.int64)
        assert (_pivot_py.leaving_bland(col, rhs, basis, 1e-9)
                == cy.leaving_bland(col, rhs, basis, 1e-9))


def test_full_solve_identical_across_kernels():
    """The solver must produce identical solutions whichever kernel runs."""
    import os
    import subprocess
    import sys

    code = (
        "import numpy as np, json\n"
        "from mtlmas.milp.simplex import solve_lp, KERNEL\n"
        "from mtlmas.milp import LE, GE, EQ\n"
        "rng = np.random.default_rng(99)\n"
        "out = []\n"
        "for _ in range(40):\n"
        "    n = int(rng.integers(1, 7)); m_ = int(rng.integers(1, 7))\n"
        "    bounds = [(float(rng.integers(-4, 1)), float(rng.integers(1, 8))) for _ in range(n)]\n"
        "    rows = []\n"
        "    for _ in range(m_):\n"
        "        coefs = {j: float(rng.integers(-3, 4)) for j in range(n) if rng.integers(0, 2)}\n"
        "        if not coefs: coefs = {0: 1.0}\n"
        "        rows.append((coefs, (LE, GE, EQ)[int(rng.integers(0, 3))], float(rng.integers(-6, 7))))\n"
        "    c = {j: float(rng.integers(-5, 6)) for j in range(n)}\n"
        "    res = solve_lp(bounds, rows, c, n)\n"
        "    out.append((res.status, None if res.x is None else res.x.tolist(), res.objective))\n"
        "print(KERNEL)\n"
        "print(json.dumps(out))\n"
    )
    envs = [dict(os.environ), dict(os.environ, MTLMAS_FORCE_PY_KERNEL="1")]
    results = []
    kernels = []
    for env in envs:
        proc = subprocess.run([sys.executable, "-c", code], env=env,
                              capture_output=True, text=True, check=True)
        kern, payload = proc.stdout.strip().split("\n", 1)
        kernels.append(kern)
        results.append(payload)
    assert kernels == ["compiled", "numpy"]
    assert results[0] == results[1]
