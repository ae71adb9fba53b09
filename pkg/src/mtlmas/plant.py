"""Continuous-time agent dynamics, discretization, observer, disturbances.

The leader is an LTI model integrated exactly under zero-order-hold inputs
(the same discrete map the MILP encodes, so planned and executed leader
trajectories coincide).  Followers run their true dynamics and a model-based
observer side by side under the consensus control law, integrated with RK4
at a fixed substep; the observer admits a closed-form exponential decay that
the integrator is checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: RK4 substeps per sample period; chosen by a self-convergence test
#: (halving the substep changes states by < 1e-8).
DEFAULT_SUBSTEPS = 50

EXPM_TOL = 1e-12
POWER_ITER_TOL = 1e-10


class PlantError(Exception):
    pass


# -- matrix exponential and ZOH discretization ------------------------------


def expm(a: np.ndarray, tol: float = EXPM_TOL) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a Taylor series."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PlantError("expm needs a square matrix")
    norm = float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    small = a / (2.0 ** squarings)
    n = a.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    k = 1
    while True:
        term = term @ small / k
        out = out + term
        if float(np.max(np.abs(term))) < tol:
            break
        k += 1
        if k > 200:
            raise PlantError("expm series failed to converge")
    for _ in range(squarings):
        out = out @ out
    return out


def discretize_zoh(a: np.ndarray, b: np.ndarray, ts: float):
    """Exact ZOH discretization via the augmented-matrix exponential."""
    if ts <= 0:
        raise PlantError("sample period must be positive")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = a.shape[0], b.shape[1]
    if b.shape[0] != n:
        raise PlantError("A and B row counts differ")
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = a * ts
    aug[:n, n:] = b * ts
    big = expm(aug)
    return big[:n, :n], big[:n, n:]


def max_singular_value(a: np.ndarray, tol: float = POWER_ITER_TOL) -> float:
    """Largest singular value by power iteration on A^T A."""
    a = np.asarray(a, dtype=float)
    ata = a.T @ a
    n = ata.shape[0]
    v = np.ones(n) / math.sqrt(n)
    lam = 0.0
    for _ in range(10_000):
        w = ata @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float(v_new @ ata @ v_new)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return math.sqrt(lam_new)
        v, lam = v_new, lam_new
    raise PlantError("power iteration failed to converge")


# -- models ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LtiModel:
    """x' = A x + B u, y = C x."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise PlantError("A must be square")
        if b.shape[0] != a.shape[0]:
            raise PlantError("B row count must match A")
        if c.shape[1] != a.shape[0]:
            raise PlantError("C column count must match A")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "_b_pinv", np.linalg.pinv(b))

    @property
    def b_pinv(self) -> np.ndarray:
        return self._b_pinv

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1]

    def check_follower_wellformed(self, x_g: np.ndarray, x0: np.ndarray,
                                  tol: float = 1e-9) -> None:
        """B B+ must act as identity where the control law needs it.

        Full-row-rank B gives B B+ = I.  A selector B (case-study followers,
        whose third coordinate is inert) passes iff (I - B B+) kills both the
        dynamics range and the initial goal error, which is exactly what the
        exponential regulation argument uses.
        """
        bbp = self.b @ self.b_pinv
        resid = (np.eye(self.n_states) - bbp)
        if float(np.max(np.abs(resid @ self.a))) > tol:
            raise PlantError("B B+ does not cover the dynamics range")
        if float(np.max(np.abs(resid @ (np.asarray(x_g) - np.asarray(x0))))) > tol:
            raise PlantError("B B+ does not cover the initial goal error")


def follower_control(x_hat: np.ndarray, x_g: np.ndarray, k: float,
                     model: LtiModel) -> np.ndarray:
    """u = -B+ A x_hat + k B+ (x_g - x_hat)."""
    return model.b_pinv @ (k * (x_g - x_hat) - model.a @ x_hat)


def observer_closed_form(x_hat: np.ndarray, x_g: np.ndarray, k: float,
                         dt: float) -> np.ndarray:
    """x_hat(t + dt) = x_g + e^{-k dt} (x_hat(t) - x_g) under the control law."""
    return x_g + math.exp(-k * dt) * (x_hat - x_g)


@dataclass
class FollowerState:
    """One follower's true state, observer estimate and parameters."""

    index: int
    model: LtiModel
    x: np.ndarray
    k: float
    d_bar: float
    x_hat: np.ndarray = None
    last_service_time: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).copy()
        if self.x_hat is None:
            self.x_hat = self.x.copy()  # estimates start exact
        else:
            self.x_hat = np.asarray(self.x_hat, dtype=float).copy()
        if self.k <= 0:
            raise PlantError(f"follower {self.index}: gain must be positive")
        if self.d_bar < 0:
            raise PlantError(f"follower {self.index}: disturbance bound < 0")

    def e1(self) -> np.ndarray:
        return self.x_hat - self.x

    def e2(self, x_g: np.ndarray) -> np.ndarray:
        return x_g - self.x_hat


def service_reset(follower: FollowerState, t: float) -> None:
    """Leader transmits the true state: estimate snaps to it, e1 becomes 0."""
    follower.x_hat = follower.x.copy()
    follower.last_service_time = t


# -- integration -------------------------------------------------------------


def rk4_step(f, x: np.ndarray, t: float, h: float) -> np.ndarray:
    k1 = f(t, x)
    k2 = f(t + h / 2.0, x + h / 2.0 * k1)
    k3 = f(t + h / 2.0, x + h / 2.0 * k2)
    k4 = f(t + h, x + h * k3)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_true(model: LtiModel, x: np.ndarray, u, d_fn, t: float, h: float,
              substeps: int = DEFAULT_SUBSTEPS) -> np.ndarray:
    """Integrate x' = A x + B u + d over [t, t+h].

    u is a constant vector or a callable u(t); the disturbance d_fn(t) is
    sampled once per substep and held constant across it.
    """
    if h <= 0:
        raise PlantError("step length must be positive")
    u_fn = u if callable(u) else (lambda _t: u)
    x = np.asarray(x, dtype=float).copy()
    sub = h / substeps
    for i in range(substeps):
        t0 = t + i * sub
        d = np.asarray(d_fn(t0), dtype=float)
        x = rk4_step(lambda tt, xx: model.a @ xx + model.b @ np.asarray(u_fn(tt)) + d,
                     x, t0, sub)
    return x


def step_observer(model: LtiModel, x_hat: np.ndarray, u, t: float, h: float,
                  substeps: int = DEFAULT_SUBSTEPS) -> np.ndarray:
    """Disturbance-free integration of the observer x_hat' = A x_hat + B u."""
    return step_true(model, x_hat, u, lambda _t: np.zeros(model.n_states),
                     t, h, substeps)


def step_follower(follower: FollowerState, x_g: np.ndarray, d_fn, t: float,
                  h: float, substeps: int = DEFAULT_SUBSTEPS) -> None:
    """Advance true state and observer jointly under the consensus law.

    The control input is continuous feedback of the observer estimate, so
    both ODEs are integrated as one coupled system; the disturbance is
    piecewise-constant per substep.
    """
    model = follower.model
    n = model.n_states
    z = np.concatenate([follower.x, follower.x_hat])
    sub = h / substeps

    def coupled(tt, zz, d):
        x, x_hat = zz[:n], zz[n:]
        u = follower_control(x_hat, x_g, follower.k, model)
        dx = model.a @ x + model.b @ u + d
        dx_hat = model.a @ x_hat + model.b @ u
        return np.concatenate([dx, dx_hat])

    for i in range(substeps):
        t0 = t + i * sub
        d = np.asarray(d_fn(t0), dtype=float)
        z = rk4_step(lambda tt, zz: coupled(tt, zz, d), z, t0, sub)
    follower.x = z[:n]
    follower.x_hat = z[n:]


# -- disturbances ------------------------------------------------------------


@dataclass
class DisturbanceModel:
    """Seeded disturbance stream: uniform in the d-ball over active dims.

    mode "ball" draws a fresh uniform ball sample per call; mode "constant"
    is the worst-case stress mode, a fixed direction at full magnitude.
    """

    d_bar: float
    active_dims: tuple
    dim: int
    rng: np.random.Generator
    mode: str = "ball"

    def __call__(self, t: float) -> np.ndarray:
        d = np.zeros(self.dim)
        if self.d_bar == 0.0 or not self.active_dims:
            return d
        n = len(self.active_dims)
        if self.mode == "constant":
            d[list(self.active_dims)] = self.d_bar / math.sqrt(n)
            return d
        direction = self.rng.normal(size=n)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            return d
        radius = self.d_bar * float(self.rng.uniform()) ** (1.0 / n)
        d[list(self.active_dims)] = direction / norm * radius
        return d


def e1_envelope(d_bar: float, lam_max: float, dt: float) -> float:
    """Worst-case estimation error growth (d_bar/lam)(e^{lam dt} - 1)."""
    if dt < 0:
        raise PlantError("negative elapsed time")
    if lam_max == 0.0:
        return d_bar * dt
    return d_bar / lam_max * (math.expm1(lam_max * dt))


# -- case-study models -------------------------------------------------------

GRAVITY = 9.81


def leader_model() -> LtiModel:
    """Small-angle hover linearization of the quadrotor leader.

    State [x1, x2, x3, v1, v2, alpha, beta, gamma]; inputs are the vertical
    velocity command and the three angular velocity commands.  Planar
    acceleration enters through the tilt angles; the output is the 3-D
    position.
    """
    a = np.zeros((8, 8))
    a[0, 3] = 1.0           # x1' = v1
    a[1, 4] = 1.0           # x2' = v2
    a[3, 6] = GRAVITY       # v1' = g*beta
    a[4, 5] = -GRAVITY      # v2' = -g*alpha
    b = np.zeros((8, 4))
    b[2, 0] = 1.0           # x3' = u1
    b[5, 1] = 1.0           # alpha' = u2
    b[6, 2] = 1.0           # beta' = u3
    b[7, 3] = 1.0           # gamma' = u4
    c = np.zeros((3, 8))
    c[0, 0] = c[1, 1] = c[2, 2] = 1.0
    return LtiModel(a, b, c)


def follower_model() -> LtiModel:
    """Planar unicycle surrogate: x1' = x1 + u1 + d1, x2' = x2 + u2 + d2,
    x3' = 0.  B selects the planar inputs so the third input is structurally
    zero."""
    a = np.diag([1.0, 1.0, 0.0])
    b = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    c = np.eye(3)
    return LtiModel(a, b, c)
