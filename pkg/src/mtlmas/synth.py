"""Receding-horizon synthesis loop.

One iteration per sample period: detect which followers the leader is
servicing, reset their observers, re-derive the minimum-dwell step bound
from the fresh goal error, rewrite the specification against the executed
prefix, re-solve the MILP for the remaining horizon, and advance the world
by one step under the newest plan.  Re-solves happen only on service events
(and when the stored plan runs out); between them the open-loop plan is
followed.

The servicing trigger is the same box predicate the specification's
proximity atoms use.  Triggering on the 2-norm ball instead would let an
optimal plan graze the ball just outside the box and re-service a follower
before its minimum dwell, so trigger and atom are kept identical; the
sensing-radius guarantee is then audited per event on the true 2-norm
distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dwell import DwellParams, max_dwell, min_dwell, step_bounds
from .milp import (GE, LE, AtomBinder, MilpModel, Status, add_l1_objective,
                   encode_dynamics, encode_formula, make_solver)
from .mtl import (Always, AtomTable, Atom, Eventually, Formula, Interval,
                  MEMBERSHIP_TOL, Not, Or, Trace, TrueF, UNBOUNDED, conj,
                  eval_weak, rewrite_at)
from .plant import (DisturbanceModel, FollowerState, LtiModel, discretize_zoh,
                    max_singular_value, service_reset, step_follower)


class SynthError(Exception):
    pass


#: Planned predicate hits must penetrate (and misses clear) their boxes by
#: this much.  Solver feasibility tolerances compound through the leader
#: dynamics when the plan is replayed exactly, so without a margin an
#: executed sample can land on the wrong side of a face the plan touched.
COMMIT_MARGIN = 1e-3


@dataclass
class SynthConfig:
    horizon: int              # N, MILP steps per solve
    ts: float
    eta: float
    v_t: float
    r_g: float
    r: float
    x_g: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    pos_bounds: tuple         # (lo, hi) arena box bounding planned leader outputs
    service_coords: tuple = (0, 1)
    step_cap: int = 10_000
    node_limit: int | None = None
    solver: str = "auto"
    mip_rel_gap: float = 1e-4
    recycle_plans: bool = True
    seed: int = 0
    substeps: int = 50
    disturbance: str = "ball"

    def __post_init__(self):
        self.x_g = np.asarray(self.x_g, dtype=float)
        self.u_min = np.asarray(self.u_min, dtype=float)
        self.u_max = np.asarray(self.u_max, dtype=float)
        if self.horizon < 1:
            raise SynthError("horizon must be at least one step")
        if self.step_cap < 1:
            raise SynthError("step cap must be positive")


@dataclass
class FollowerSpec:
    index: int                # 1-based
    model: LtiModel
    x0: np.ndarray
    k: float
    d_bar: float


@dataclass
class ServiceEvent:
    follower: int
    step: int
    t: float
    pre_e1: float
    pre_e2: float
    post_e2: float
    m_new: int
    m_uncapped: int
    true_distance: float


@dataclass
class SolveRecord:
    step: int
    status: str
    objective: float
    nodes: int
    n_binaries: int
    n_rows: int
    mode: str = "full"


@dataclass
class SynthesisLog:
    status: str = "running"
    steps: int = 0
    ts: float = 0.0
    t: list = field(default_factory=list)
    samples: list = field(default_factory=list)       # stacked y rows
    leader_x: list = field(default_factory=list)      # full leader state per index
    inputs: list = field(default_factory=list)        # applied u per step
    follower_x: list = field(default_factory=list)    # per index: (Q, m)
    follower_xhat: list = field(default_factory=list)
    e1_norms: list = field(default_factory=list)      # per index: (Q,)
    e2_norms: list = field(default_factory=list)
    events: list = field(default_factory=list)
    solves: list = field(default_factory=list)
    n_bounds: dict = field(default_factory=dict)
    m_bounds_initial: dict = field(default_factory=dict)
    m_bounds_final: dict = field(default_factory=dict)
    max_dwell_s: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    abort_reason: str = ""

    def trace(self, dim: int, n_followers: int) -> Trace:
        return Trace(np.asarray(self.samples), self.ts, dim, n_followers)

    @property
    def total_objective(self) -> float:
        return float(sum(s.objective for s in self.solves
                         if not math.isnan(s.objective)))

    def applied_effort(self) -> np.ndarray:
        """Per-step L1 norm of the executed inputs."""
        if not self.inputs:
            return np.zeros(0)
        return np.abs(np.asarray(self.inputs)).sum(axis=1)


def near_atom_name(follower: int) -> str:
    return f"near{follower}"


def build_phi(bounds: dict, phi_p: Formula, from_index: int = 0,
              inflight=()) -> Formula:
    """Assemble phi = phi1 and phi2 and phi_p from per-follower (n, m).

    phi1 windows use [0, n_i - 1]: a sliding window of length c bounds
    inter-service gaps by c + 1 steps, so [0, n_i] would allow gaps of
    (n_i + 1) Ts, exceeding the maximum dwell bound the step count n_i was
    derived from.  phi2 starts at from_index because the minimum-dwell step
    bound is re-derived at every service; restarting the box keeps a larger
    new m from being applied retroactively to already-executed services.
    Windows opened by past services that still reach into the future are
    carried explicitly through ``inflight`` (atom name, first, last).
    """
    parts = []
    for i in sorted(bounds):
        n_i, _ = bounds[i]
        parts.append(Always(Eventually(Atom(near_atom_name(i)),
                                       Interval(0, n_i - 1))))
    for i in sorted(bounds):
        _, m_i = bounds[i]
        if m_i > 0:
            near = Atom(near_atom_name(i))
            parts.append(Always(Or(Not(near),
                                   Always(Not(near), Interval(1, m_i))),
                                Interval(from_index, UNBOUNDED)))
    for name, first, last in inflight:
        parts.append(Always(Not(Atom(name)), Interval(first, last)))
    if not isinstance(phi_p, TrueF):
        parts.append(phi_p)
    return conj(parts)


def detect_service(atoms: AtomTable, trace: Trace, ell: int,
                   followers) -> list:
    """Followers whose proximity atom holds on the sample at ell."""
    return [f.index for f in followers
            if atoms.holds(near_atom_name(f.index), trace, ell)]


@dataclass
class SynthProblem:
    leader: LtiModel
    leader_x0: np.ndarray
    followers: list
    atoms: AtomTable
    phi_p: Formula
    config: SynthConfig

    def dwell_params(self, spec: FollowerSpec) -> DwellParams:
        cfg = self.config
        return DwellParams(
            lam_max_a=max_singular_value(spec.model.a),
            d_bar=spec.d_bar, v_t=cfg.v_t, k=spec.k, ts=cfg.ts,
            r_g=cfg.r_g, r=cfg.r, eta=cfg.eta,
            lam_max_c=max_singular_value(spec.model.c))


def _service_distance(y0: np.ndarray, y_other: np.ndarray, coords) -> float:
    d = np.asarray([y0[c] - y_other[c] for c in coords])
    return float(np.linalg.norm(d))


def run(problem: SynthProblem) -> SynthesisLog:
    cfg = problem.config
    leader = problem.leader
    n_followers = len(problem.followers)
    dim = leader.c.shape[0]
    ts = cfg.ts

    a_d, b_d = discretize_zoh(leader.a, leader.b, ts)
    c_d = leader.c

    params = {s.index: problem.dwell_params(s) for s in problem.followers}
    n_by, m_by = {}, {}
    log = SynthesisLog(ts=ts)
    log.leader_x.append(np.asarray(problem.leader_x0, dtype=float).copy())
    followers = []
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_followers)
    for spec, seed in zip(problem.followers, seeds):
        spec.model.check_follower_wellformed(cfg.x_g, spec.x0)
        st = FollowerState(spec.index, spec.model, spec.x0, spec.k, spec.d_bar)
        e2_0 = float(np.linalg.norm(st.e2(cfg.x_g)))
        params[spec.index].check_comparable(e2_0)
        n_i, m_i = step_bounds(max_dwell(params[spec.index]),
                               min_dwell(params[spec.index], e2_0), ts)
        if cfg.horizon < n_i:
            raise SynthError(
                f"horizon {cfg.horizon} cannot fit follower {spec.index}'s "
                f"service window of {n_i} steps")
        n_by[spec.index] = n_i
        m_by[spec.index] = min(m_i, n_i - 1) if m_i > 0 else 0
        log.max_dwell_s[spec.index] = max_dwell(params[spec.index])
        active = tuple(k for k in range(spec.model.n_states)
                       if np.any(spec.model.b[k] != 0.0))
        followers.append((st, DisturbanceModel(
            spec.d_bar, active, spec.model.n_states,
            np.random.default_rng(seed), cfg.disturbance)))

    log.n_bounds = dict(n_by)
    log.m_bounds_initial = dict(m_by)
    solver = make_solver(cfg.solver, cfg.node_limit, cfg.mip_rel_gap)
    decay = {s.index: math.exp(-s.k * ts) for s in problem.followers}

    plan: dict[int, np.ndarray] = {}
    prev_schedule: dict = {}
    ell = 0
    status = "converged"

    while True:
        t = ell * ts
        y0 = c_d @ log.leader_x[ell]
        yhats = [f.model.c @ f.x_hat for f, _ in followers]
        row = np.concatenate([y0] + yhats)
        log.t.append(t)
        log.samples.append(row)
        log.follower_x.append(np.array([f.x for f, _ in followers]))
        log.follower_xhat.append(np.array([f.x_hat for f, _ in followers]))
        log.e1_norms.append(np.array(
            [float(np.linalg.norm(f.e1())) for f, _ in followers]))
        log.e2_norms.append(np.array(
            [float(np.linalg.norm(f.e2(cfg.x_g))) for f, _ in followers]))

        goal_pos = leader_goal_position(problem, cfg)
        dists = [float(np.linalg.norm((f.model.c @ f.x) - goal_pos))
                 for f, _ in followers]
        if all(d <= cfg.r_g for d in dists):
            status = "converged"
            break
        if ell >= cfg.step_cap:
            status = "timeout"
            break

        trace = log.trace(dim, n_followers)
        serviced = detect_service(problem.atoms, trace, ell,
                                  [f for f, _ in followers])
        if serviced or ell not in plan:
            for idx in serviced:
                f = next(f for f, _ in followers if f.index == idx)
                true_d = _service_distance(y0, f.model.c @ f.x,
                                           cfg.service_coords)
                if true_d > cfg.r + 1e-9:
                    log.status = "aborted"
                    log.abort_reason = (
                        f"service to follower {idx} at step {ell} with true "
                        f"distance {true_d:.6f} > R = {cfg.r}; the sensing "
                        f"assumption is violated")
                    log.steps = ell
                    _finalize(log, problem, m_by)
                    return log
                pre_e1 = float(np.linalg.norm(f.e1()))
                pre_e2 = float(np.linalg.norm(f.e2(cfg.x_g)))
                service_reset(f, t)
                post_e2 = float(np.linalg.norm(f.e2(cfg.x_g)))
                md = min_dwell(params[idx], post_e2)
                _, m_raw = step_bounds(max_dwell(params[idx]), md, ts)
                # the minimum-dwell bound blows up as |e2| approaches V_T;
                # cap it so the service cadence stays satisfiable
                m_new = min(m_raw, n_by[idx] - 1) if m_raw > 0 else 0
                m_by[idx] = m_new
                log.events.append(ServiceEvent(
                    idx, ell, t, pre_e1, pre_e2, post_e2, m_new, m_raw,
                    true_d))
            inflight = []
            for ev in log.events:
                if ev.m_new > 0 and ev.step + ev.m_new >= ell + 1:
                    inflight.append((near_atom_name(ev.follower),
                                     ev.step + 1, ev.step + ev.m_new))
            phi = build_phi({i: (n_by[i], m_by[i]) for i in n_by},
                            problem.phi_p, from_index=ell, inflight=inflight)
            sol = None
            if cfg.recycle_plans and prev_schedule:
                sol, u_vars, schedule = _solve_step(
                    problem, cfg, log, ell, a_d, b_d, c_d, phi, trace,
                    followers, decay, solver, fixed_schedule=prev_schedule)
                if sol.status is not Status.OPTIMAL:
                    sol = None  # recycled schedule no longer fits; replan
            if sol is None:
                sol, u_vars, schedule = _solve_step(
                    problem, cfg, log, ell, a_d, b_d, c_d, phi, trace,
                    followers, decay, solver)
            if sol.status is not Status.OPTIMAL:
                status = ("infeasible" if sol.status is Status.INFEASIBLE
                          else "iterlimit")
                break
            prev_schedule = schedule
            plan = {j: np.clip(sol.values(vids), cfg.u_min, cfg.u_max)
                    for j, vids in u_vars.items()}

        u = plan[ell]
        log.inputs.append(u)
        log.leader_x.append(a_d @ log.leader_x[ell] + b_d @ u)
        for f, dist in followers:
            step_follower(f, cfg.x_g, dist, t, ts, cfg.substeps)
        ell += 1

    log.status = status
    log.steps = ell
    _finalize(log, problem, m_by)
    return log


def leader_goal_position(problem: SynthProblem, cfg: SynthConfig) -> np.ndarray:
    """Cx_g expressed in the follower output space."""
    model = problem.followers[0].model
    return model.c @ cfg.x_g


def _solve_step(problem, cfg, log, ell, a_d, b_d, c_d, phi, trace, followers,
                decay, solver, fixed_schedule=None):
    """Build and solve the horizon MILP at step ell.

    With fixed_schedule (a map (atom name, index) -> 0/1 from the previous
    solution), the service/visit indicators inside the previous horizon are
    pinned and only the newly exposed tail plus the continuous trajectory
    are optimized; any feasible result keeps every specification guarantee.
    Returns (solution, u variable ids per step, schedule of this solve).
    """
    bf = rewrite_at(phi, 0, ell, trace, problem.atoms,
                    horizon=ell + cfg.horizon - 1)
    model = MilpModel()
    handles = encode_dynamics(model, a_d, b_d, c_d, log.leader_x[ell],
                              cfg.horizon, (cfg.u_min, cfg.u_max),
                              start=ell, pos_bounds=cfg.pos_bounds)
    predictions = {}
    for f, _ in followers:
        x_hat = f.x_hat.copy()
        for j in range(ell, ell + cfg.horizon):
            predictions[(f.index, j)] = f.model.c @ x_hat
            x_hat = cfg.x_g + decay[f.index] * (x_hat - cfg.x_g)
    binder = AtomBinder(problem.atoms, handles.y_vars, predictions,
                        membership_tol=MEMBERSHIP_TOL)
    u_flat = [vid for j in sorted(handles.u_vars)
              for vid in handles.u_vars[j]]
    t_flat = add_l1_objective(model, u_flat)
    literal_map: dict = {}
    encode_formula(model, bf, binder, literal_map=literal_map,
                   commit_margin=COMMIT_MARGIN)
    _effort_cuts(model, problem.atoms, predictions, literal_map, t_flat,
                 a_d, b_d, c_d, log.leader_x[ell], ell, cfg.horizon)
    if fixed_schedule is not None:
        for (positive, atom), vid in literal_map.items():
            if positive and (atom.name, atom.index) in fixed_schedule:
                model.fix_var(vid, fixed_schedule[(atom.name, atom.index)])
    sol = solver.solve(model)
    schedule = {}
    if sol.status is Status.OPTIMAL:
        for (positive, atom), vid in literal_map.items():
            if positive:
                schedule[(atom.name, atom.index)] = float(round(sol.value(vid)))
    log.solves.append(SolveRecord(
        ell, sol.status.value, sol.objective, sol.nodes, model.n_binary,
        len(model.rows), "recycled" if fixed_schedule is not None else "full"))
    return sol, handles.u_vars, schedule


def _effort_cuts(model, atoms, predictions, literal_map, t_flat,
                 a_d, b_d, c_d, x_now, ell, horizon) -> None:
    """Strengthening rows linking service indicators to input effort.

    All rows are consequences of the dynamics, so they never cut a feasible
    point; they lift the LP relaxation off the zero-effort floor that the
    big-M indicator structure otherwise permits.  Two families:

    - reach: an indicator forcing the output into a half-space its drift
      trajectory violates implies input effort proportional to the gap,
      weighted by the exact impulse-response coefficients;
    - conflict: two indicators at the same index whose boxes are disjoint
      along some axis cannot both hold.
    """
    from .mtl.formula import HalfSpaceConj, Proximity  # local import cycle guard

    nu = b_d.shape[1]
    dim = c_d.shape[0]
    # impulse responses C A^o B and drift positions C A^p x_now
    imps = []
    drifts = {}
    power = np.eye(a_d.shape[0])
    for o in range(horizon):
        drifts[ell + o] = c_d @ (power @ x_now)
        imps.append(c_d @ (power @ b_d))
        power = a_d @ power
    drifts[ell + horizon] = c_d @ (power @ x_now)

    catalog = []  # (j, z, intervals {axis: (lo, hi)} or None, faces)
    for (positive, atom), z in sorted(literal_map.items(),
                                      key=lambda kv: (kv[0][1].name,
                                                      kv[0][1].index,
                                                      kv[0][0])):
        if not positive:
            continue
        desc = atoms[atom.name]
        j = atom.index
        if j <= ell:
            continue
        if isinstance(desc, HalfSpaceConj) and desc.agent == 0:
            faces = [(np.asarray(a, dtype=float), float(b))
                     for a, b in desc.rows]
            intervals = _axis_intervals(faces, dim)
        elif isinstance(desc, Proximity):
            target = predictions[(desc.follower, j)]
            w = desc.half_width
            faces = []
            intervals = {}
            for c in desc.coords:
                e = np.zeros(dim)
                e[c] = 1.0
                faces.append((e, float(target[c]) + w))
                faces.append((-e, -float(target[c]) + w))
                intervals[c] = (float(target[c]) - w, float(target[c]) + w)
        else:
            continue
        catalog.append((j, z, intervals, faces))
        _reach_cuts(model, imps, drifts, t_flat, nu, ell, j, z, faces)

    for idx1 in range(len(catalog)):
        j1, z1, iv1, _ = catalog[idx1]
        if iv1 is None:
            continue
        for idx2 in range(idx1 + 1, len(catalog)):
            j2, z2, iv2, _ = catalog[idx2]
            if iv2 is None or z1 == z2 or j1 != j2:
                continue
            axis, gap, sign = _best_axis_gap(iv1, iv2)
            if axis is not None and gap > 1e-9:
                model.add_row({z1: 1.0, z2: 1.0}, LE, 1.0,
                              f"conflict{z1}_{z2}")


def _axis_intervals(faces, dim):
    """Recover {axis: (lo, hi)} from axis-aligned faces; None if skewed."""
    lo = {}
    hi = {}
    for a_vec, b in faces:
        nz = np.nonzero(a_vec)[0]
        if len(nz) != 1:
            return None
        ax = int(nz[0])
        if a_vec[ax] > 0:
            hi[ax] = min(hi.get(ax, math.inf), b / a_vec[ax])
        else:
            lo[ax] = max(lo.get(ax, -math.inf), b / a_vec[ax])
    return {ax: (lo.get(ax, -math.inf), hi.get(ax, math.inf))
            for ax in set(lo) | set(hi)}


def _best_axis_gap(iv_first, iv_second):
    """Largest separating axis between two boxes, with travel direction."""
    best = (None, 0.0, 1.0)
    for ax in iv_first:
        if ax not in iv_second:
            continue
        lo1, hi1 = iv_first[ax]
        lo2, hi2 = iv_second[ax]
        up = lo2 - hi1      # second box above the first along ax
        down = lo1 - hi2    # second box below
        if up > best[1]:
            best = (ax, up, 1.0)
        if down > best[1]:
            best = (ax, down, -1.0)
    return best


def _reach_cuts(model, imps, drifts, t_flat, nu, ell, j, z, faces) -> None:
    steps = j - ell
    for a_vec, b in faces:
        gap = float(a_vec @ drifts[j]) - b
        if gap <= 1e-9:
            continue
        coefs = {}
        biggest = 0.0
        for q in range(steps):
            resp = np.abs(a_vec @ imps[steps - 1 - q])
            biggest = max(biggest, float(resp.max()))
            for ch in range(nu):
                if resp[ch] > 1e-12:
                    coefs[t_flat[q * nu + ch]] = float(resp[ch])
        if biggest <= 1e-12:
            # the face cannot be reached by any input: forbid the literal
            model.add_row({z: 1.0}, LE, 0.0, f"cut0_{z}")
            continue
        coefs[z] = -gap
        model.add_row(coefs, GE, 0.0, f"cut_{z}_{j}")


def _finalize(log: SynthesisLog, problem: SynthProblem, m_by: dict) -> None:
    log.m_bounds_final = dict(m_by)
    cfg = problem.config
    n_followers = len(problem.followers)
    dim = problem.leader.c.shape[0]
    trace = log.trace(dim, n_followers)
    static = build_phi({i: (log.n_bounds[i], 0) for i in log.n_bounds},
                       problem.phi_p)
    static_ok = eval_weak(trace, 0, static, problem.atoms)
    cadence = cadence_report(log)
    log.verdict = {
        "static_weakly_satisfied": bool(static_ok),
        "cadence_ok": cadence["ok"],
        "weakly_satisfied": bool(static_ok) and cadence["ok"],
        "cadence": cadence,
    }


def cadence_report(log: SynthesisLog) -> dict:
    """Audit executed service gaps against [m+1, n] in step units.

    The upper bound applies to every gap, including the one from the initial
    implicit service at step 0; the lower bound applies after each real
    event with its own operative m."""
    ok = True
    details = {}
    for i in sorted(log.n_bounds):
        n_i = log.n_bounds[i]
        steps = [ev.step for ev in log.events if ev.follower == i]
        ms = [ev.m_new for ev in log.events if ev.follower == i]
        gaps = []
        prev = 0
        prev_m = None
        for s, m in zip(steps, ms):
            gap = s - prev
            lower = (prev_m + 1) if (prev_m is not None and prev_m > 0) else None
            upper_ok = gap <= n_i or prev == s  # step-0 service has gap 0
            lower_ok = lower is None or gap >= lower
            gaps.append({"at": s, "gap": gap, "lower": lower, "upper": n_i,
                         "ok": upper_ok and lower_ok})
            ok = ok and upper_ok and lower_ok
            prev, prev_m = s, m
        # trailing gap: a window that closed before termination with no
        # service in it is a violation even though no event follows it
        if log.steps - prev > n_i:
            ok = False
            gaps.append({"at": None, "gap": log.steps - prev, "lower": None,
                         "upper": n_i, "ok": False})
        details[i] = gaps
    return {"ok": ok, "gaps": details}
