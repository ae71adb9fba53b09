"""Scenario files: schema, validation, derived quantities.

A scenario is a JSON object holding the agent models' numeric parameters,
the named axis-aligned regions, the practical-constraint formula text and
the run controls.  Loading validates every theorem-side condition (the V_T
cap, dwell comparability at the initial goal errors, cadence feasibility)
and precomputes the step bounds so `check` can echo them without running.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dwell import DwellError, max_dwell, min_dwell, step_bounds
from .mtl import AtomTable, HalfSpaceConj, Proximity, parse
from .plant import follower_model, leader_model, max_singular_value
from .synth import (FollowerSpec, SynthConfig, SynthProblem, near_atom_name)

ARENA_MARGIN = 0.10


class ScenarioError(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.field_path = path


@dataclass
class Region:
    center: np.ndarray
    half_extents: np.ndarray

    def halfspaces(self):
        rows = []
        d = len(self.center)
        for k in range(d):
            e = [0.0] * d
            e[k] = 1.0
            rows.append((tuple(e), float(self.center[k] + self.half_extents[k])))
            e = [0.0] * d
            e[k] = -1.0
            rows.append((tuple(e), float(-(self.center[k] - self.half_extents[k]))))
        return tuple(rows)

    @property
    def lo(self):
        return self.center - self.half_extents

    @property
    def hi(self):
        return self.center + self.half_extents


@dataclass
class Scenario:
    name: str
    seed: int
    ts: float
    horizon: int
    eta: float
    v_t: float
    r_g: float
    r: float
    x_g: np.ndarray
    leader_position: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    followers: list
    regions: dict
    phi_p_text: str
    step_cap: int = 10_000
    node_limit: int | None = None
    solver: str = "auto"
    mip_rel_gap: float = 0.05
    recycle_plans: bool = True
    service_coords: tuple = (0, 1)
    disturbance: str = "ball"
    substeps: int = 50
    derived: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "name": self.name, "seed": self.seed, "ts": self.ts,
            "horizon": self.horizon, "eta": self.eta, "v_t": self.v_t,
            "r_g": self.r_g, "r": self.r, "x_g": self.x_g.tolist(),
            "step_cap": self.step_cap, "node_limit": self.node_limit,
            "solver": self.solver, "mip_rel_gap": self.mip_rel_gap,
            "recycle_plans": self.recycle_plans,
            "service_coords": list(self.service_coords),
            "disturbance": self.disturbance, "substeps": self.substeps,
            "leader": {"position": self.leader_position.tolist(),
                       "u_min": self.u_min.tolist(),
                       "u_max": self.u_max.tolist()},
            "followers": [{"position": list(p), "k": k, "d_bar": d}
                          for p, k, d in self.followers],
            "regions": {name: {"center": r.center.tolist(),
                               "half_extents": r.half_extents.tolist()}
                        for name, r in self.regions.items()},
            "phi_p": self.phi_p_text,
        }


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise ScenarioError(f"{path}.{key}", "missing required field")
    return obj[key]


def _vector(value, length: int, path: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (length,):
        raise ScenarioError(path, f"expected a vector of length {length}")
    return arr


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(str(path), f"not valid JSON: {exc}") from None
    return scenario_from_dict(raw, origin=str(path))


def scenario_from_dict(raw: dict, origin: str = "scenario") -> Scenario:
    leader_raw = _need(raw, "leader", origin)
    followers_raw = _need(raw, "followers", origin)
    if not isinstance(followers_raw, list) or not followers_raw:
        raise ScenarioError(f"{origin}.followers",
                            "at least one follower is required")
    regions_raw = raw.get("regions", {})

    u_min = leader_raw.get("u_min", -100.0)
    u_max = leader_raw.get("u_max", 100.0)
    if np.isscalar(u_min):
        u_min = [float(u_min)] * 4
    if np.isscalar(u_max):
        u_max = [float(u_max)] * 4

    followers = []
    for i, f in enumerate(followers_raw, start=1):
        fp = f"{origin}.followers[{i - 1}]"
        pos = _vector(_need(f, "position", fp), 3, f"{fp}.position")
        k = float(_need(f, "k", fp))
        d_bar = float(_need(f, "d_bar", fp))
        if k <= 0:
            raise ScenarioError(f"{fp}.k", "gain must be positive")
        if d_bar <= 0:
            raise ScenarioError(f"{fp}.d_bar", "disturbance bound must be positive")
        followers.append((tuple(pos.tolist()), k, d_bar))

    regions = {}
    for name, r in regions_raw.items():
        rp = f"{origin}.regions.{name}"
        center = _vector(_need(r, "center", rp), 3, f"{rp}.center")
        half = _vector(_need(r, "half_extents", rp), 3, f"{rp}.half_extents")
        if np.any(half <= 0):
            raise ScenarioError(f"{rp}.half_extents",
                                "region box must be nonempty")
        regions[name] = Region(center, half)

    scenario = Scenario(
        name=raw.get("name", "scenario"),
        seed=int(raw.get("seed", 0)),
        ts=float(_need(raw, "ts", origin)),
        horizon=int(_need(raw, "horizon", origin)),
        eta=float(_need(raw, "eta", origin)),
        v_t=float(_need(raw, "v_t", origin)),
        r_g=float(_need(raw, "r_g", origin)),
        r=float(_need(raw, "r", origin)),
        x_g=_vector(_need(raw, "x_g", origin), 3, f"{origin}.x_g"),
        leader_position=_vector(_need(leader_raw, "position", f"{origin}.leader"),
                                3, f"{origin}.leader.position"),
        u_min=_vector(u_min, 4, f"{origin}.leader.u_min"),
        u_max=_vector(u_max, 4, f"{origin}.leader.u_max"),
        followers=followers,
        regions=regions,
        phi_p_text=raw.get("phi_p", "T"),
        step_cap=int(raw.get("step_cap", 10_000)),
        node_limit=raw.get("node_limit"),
        solver=raw.get("solver", "auto"),
        mip_rel_gap=float(raw.get("mip_rel_gap", 0.05)),
        recycle_plans=bool(raw.get("recycle_plans", True)),
        service_coords=tuple(raw.get("service_coords", [0, 1])),
        disturbance=raw.get("disturbance", "ball"),
        substeps=int(raw.get("substeps", 50)),
    )
    build_problem(scenario)  # validate eagerly; raises with the failed condition
    return scenario


def atom_table(scenario: Scenario) -> AtomTable:
    table = AtomTable()
    for name, region in scenario.regions.items():
        table.add(f"in{name}", HalfSpaceConj(agent=0, rows=region.halfspaces()))
    for i in range(1, len(scenario.followers) + 1):
        table.add(near_atom_name(i),
                  Proximity(follower=i, eta=scenario.eta,
                            coords=scenario.service_coords))
    return table


def arena_bounds(scenario: Scenario):
    """Bounding box over all regions and the leader start, widened by 10%.

    Planned leader outputs are confined to this box; it also provides the
    finite variable bounds the predicate big-M values are derived from.
    """
    points = [scenario.leader_position]
    for region in scenario.regions.values():
        points.append(region.lo)
        points.append(region.hi)
    pts = np.vstack(points)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1.0)
    return lo - ARENA_MARGIN * span, hi + ARENA_MARGIN * span


def build_problem(scenario: Scenario) -> SynthProblem:
    leader = leader_model()
    x0 = np.zeros(8)
    x0[:3] = scenario.leader_position

    table = atom_table(scenario)
    try:
        phi_p = parse(scenario.phi_p_text, table)
    except Exception as exc:
        raise ScenarioError("phi_p", str(exc)) from None

    cfg = SynthConfig(
        horizon=scenario.horizon, ts=scenario.ts, eta=scenario.eta,
        v_t=scenario.v_t, r_g=scenario.r_g, r=scenario.r, x_g=scenario.x_g,
        u_min=scenario.u_min, u_max=scenario.u_max,
        pos_bounds=arena_bounds(scenario),
        service_coords=scenario.service_coords,
        step_cap=scenario.step_cap, node_limit=scenario.node_limit,
        solver=scenario.solver, mip_rel_gap=scenario.mip_rel_gap,
        recycle_plans=scenario.recycle_plans, seed=scenario.seed,
        substeps=scenario.substeps, disturbance=scenario.disturbance)

    specs = []
    model = follower_model()
    for i, (pos, k, d_bar) in enumerate(scenario.followers, start=1):
        specs.append(FollowerSpec(i, model, np.asarray(pos), k, d_bar))

    problem = SynthProblem(leader=leader, leader_x0=x0, followers=specs,
                           atoms=table, phi_p=phi_p, config=cfg)

    derived = {"lam_max_c": max_singular_value(model.c),
               "followers": {}}
    for spec in specs:
        try:
            p = problem.dwell_params(spec)
            e2_0 = float(np.linalg.norm(scenario.x_g - np.asarray(spec.x0)))
            p.check_comparable(e2_0)
            md = min_dwell(p, e2_0)
            n_i, m_i = step_bounds(max_dwell(p), md, scenario.ts)
        except DwellError as exc:
            raise ScenarioError(f"followers[{spec.index - 1}]", str(exc)) from None
        derived["followers"][spec.index] = {
            "lam_max_a": p.lam_max_a,
            "max_dwell_s": max_dwell(p),
            "min_dwell0_s": md,
            "n": n_i,
            "m0": m_i,
        }
    scenario.derived = derived
    return problem
