"""Dwell-time conditions and their conversion to integer step bounds.

The maximum dwell time keeps the estimation error below the threshold V_T
between services; the minimum dwell time guarantees the goal error shrinks
across a service despite the reset jump.  Both are closed forms in the model
constants; the synthesis loop re-evaluates the minimum one at every service
because it depends on the goal-error norm at that instant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class DwellError(Exception):
    pass


@dataclass(frozen=True)
class DwellParams:
    lam_max_a: float      # largest singular value of the follower A
    d_bar: float          # disturbance bound for this follower
    v_t: float            # estimation error threshold
    k: float              # consensus gain for this follower
    ts: float             # sample period
    r_g: float            # feedback region radius
    r: float              # communication/sensing radius
    eta: float            # servicing distance
    lam_max_c: float      # largest singular value of the output map

    def __post_init__(self):
        if self.lam_max_a <= 0 or self.d_bar <= 0 or self.v_t <= 0:
            raise DwellError("lam_max(A), d_bar and V_T must be positive")
        if self.k <= 0 or self.ts <= 0:
            raise DwellError("gain and sample period must be positive")
        if not 0 <= self.eta < self.r:
            raise DwellError(f"eta must lie in [0, R), got eta={self.eta}, R={self.r}")
        cap = min(self.r_g / (2.0 * self.lam_max_c),
                  (self.r - self.eta) / self.lam_max_c)
        if self.v_t > cap + 1e-12:
            raise DwellError(
                f"V_T={self.v_t} exceeds min(R_g/(2 lam_max(C)), "
                f"(R - eta)/lam_max(C)) = {cap}; services could violate the "
                f"sensing radius")

    def check_comparable(self, e2_norm: float) -> None:
        """Maximum dwell must dominate the minimum dwell at this goal error."""
        if min_dwell(self, e2_norm) > max_dwell(self) + 1e-12:
            raise DwellError(
                f"minimum dwell {min_dwell(self, e2_norm):.4f}s exceeds the "
                f"maximum dwell {max_dwell(self):.4f}s at |e2| = {e2_norm:.4f}; "
                f"the servicing cadence is unsatisfiable")


def max_dwell(params: DwellParams) -> float:
    """(1/lam) ln(lam V_T / d_bar + 1): longest gap keeping |e1| <= V_T."""
    lam = params.lam_max_a
    return math.log(lam * params.v_t / params.d_bar + 1.0) / lam


def min_dwell(params: DwellParams, e2_norm_at_service: float) -> float:
    """(1/k) ln(|e2| / (|e2| - V_T)): shortest gap that shrinks |e2|.

    Zero once |e2| <= V_T: the condition is only required before the goal
    error first drops below the threshold.
    """
    if e2_norm_at_service <= params.v_t:
        return 0.0
    return math.log(e2_norm_at_service /
                    (e2_norm_at_service - params.v_t)) / params.k


def step_bounds(max_d: float, min_d: float, ts: float):
    """(n, m): service at most every n steps, at least m+1 steps apart.

    n = floor(max_d / ts) so n*ts never exceeds the dwell bound; m places
    min_d inside [(m-1) ts, m ts), i.e. floor + 1, and is 0 when min_d is 0
    (the constraint is dropped for that follower).
    """
    if ts <= 0:
        raise DwellError("sample period must be positive")
    n = int(math.floor(max_d / ts))
    if n == 0:
        raise DwellError(
            f"infeasible cadence: sample period {ts}s is coarser than the "
            f"maximum dwell time {max_d:.4f}s")
    m = 0 if min_d == 0.0 else int(math.floor(min_d / ts)) + 1
    return n, m
