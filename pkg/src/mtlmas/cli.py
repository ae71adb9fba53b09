"""Command-line interface: run scenarios, validate them, monitor traces.

``run`` executes the synthesis loop and writes trajectories.csv, events.csv,
inputs.csv, summary.json and plot-ready columnar files; ``check`` validates
a scenario and echoes the derived dwell quantities; ``monitor`` evaluates a
formula against a previously written trajectories.csv.  All file writes are
atomic (write to a temp name, then rename), and outputs contain no wall
clock timing, so identical scenario + seed reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .mtl import Trace, eval_strong, eval_weak, parse
from .scenario import (Scenario, ScenarioError, atom_table, build_problem,
                       load_scenario)
from .synth import SynthError, SynthesisLog, run as synth_run


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(headers, rows) -> str:
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def trajectories_csv(log: SynthesisLog, n_followers: int) -> str:
    headers = ["t", "y0_x", "y0_y", "y0_z"]
    for i in range(1, n_followers + 1):
        headers += [f"f{i}_x1", f"f{i}_x2", f"f{i}_x3",
                    f"f{i}_xhat1", f"f{i}_xhat2", f"f{i}_xhat3",
                    f"f{i}_e1", f"f{i}_e2"]
    rows = []
    for j, t in enumerate(log.t):
        row = [float(t)] + [float(v) for v in log.samples[j][:3]]
        for i in range(n_followers):
            row += [float(v) for v in log.follower_x[j][i]]
            row += [float(v) for v in log.follower_xhat[j][i]]
            row += [float(log.e1_norms[j][i]), float(log.e2_norms[j][i])]
        rows.append(row)
    return _csv(headers, rows)


def events_csv(log: SynthesisLog) -> str:
    headers = ["step", "t", "follower", "pre_e1", "pre_e2", "post_e2",
               "m_new", "true_distance"]
    rows = [[e.step, float(e.t), e.follower, float(e.pre_e1),
             float(e.pre_e2), float(e.post_e2), e.m_new,
             float(e.true_distance)] for e in log.events]
    return _csv(headers, rows)


def inputs_csv(log: SynthesisLog) -> str:
    n_u = len(log.inputs[0]) if log.inputs else 4
    headers = ["step", "t"] + [f"u{k + 1}" for k in range(n_u)]
    rows = [[j, float(j * log.ts)] + [float(v) for v in u]
            for j, u in enumerate(log.inputs)]
    return _csv(headers, rows)


def summary_json(scenario: Scenario, log: SynthesisLog) -> str:
    counts = {}
    for e in log.events:
        counts[str(e.follower)] = counts.get(str(e.follower), 0) + 1
    doc = {
        "package_version": __version__,
        "scenario": scenario.to_jsonable(),
        "derived": scenario.derived,
        "status": log.status,
        "steps": log.steps,
        "abort_reason": log.abort_reason,
        "verdict": log.verdict,
        "service_counts": counts,
        "n_bounds": {str(k): v for k, v in log.n_bounds.items()},
        "m_bounds_initial": {str(k): v for k, v in log.m_bounds_initial.items()},
        "m_bounds_final": {str(k): v for k, v in log.m_bounds_final.items()},
        "max_dwell_s": {str(k): v for k, v in log.max_dwell_s.items()},
        "objective_history": [
            {"step": s.step, "status": s.status, "objective":
             None if s.objective != s.objective else s.objective,
             "nodes": s.nodes, "binaries": s.n_binaries, "rows": s.n_rows,
             "mode": s.mode}
            for s in log.solves],
        "total_applied_effort": float(log.applied_effort().sum()),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def plotdata_files(log: SynthesisLog, n_followers: int) -> dict:
    """Columnar files sufficient to regenerate the four result panels."""
    files = {}
    n_u = len(log.inputs[0]) if log.inputs else 4
    files["fig_a_inputs.csv"] = _csv(
        ["t"] + [f"u{k + 1}" for k in range(n_u)],
        [[float(j * log.ts)] + [float(v) for v in u]
         for j, u in enumerate(log.inputs)])
    headers = ["t", "leader_x", "leader_y"]
    for i in range(1, n_followers + 1):
        headers += [f"f{i}_x", f"f{i}_y"]
    rows = []
    for j, t in enumerate(log.t):
        row = [float(t), float(log.samples[j][0]), float(log.samples[j][1])]
        for i in range(n_followers):
            row += [float(log.follower_x[j][i][0]),
                    float(log.follower_x[j][i][1])]
        rows.append(row)
    files["fig_b_planar.csv"] = _csv(headers, rows)
    files["fig_c_e1_norms.csv"] = _csv(
        ["t"] + [f"f{i}_e1" for i in range(1, n_followers + 1)],
        [[float(t)] + [float(v) for v in log.e1_norms[j]]
         for j, t in enumerate(log.t)])
    files["fig_d_e2_norms.csv"] = _csv(
        ["t"] + [f"f{i}_e2" for i in range(1, n_followers + 1)],
        [[float(t)] + [float(v) for v in log.e2_norms[j]]
         for j, t in enumerate(log.t)])
    return files


def run_and_emit(scenario: Scenario, outdir) -> int:
    """Run the loop and write all outputs; nonzero exit unless converged."""
    outdir = Path(outdir)
    problem = build_problem(scenario)
    log = synth_run(problem)
    n_followers = len(scenario.followers)
    _atomic_write(outdir / "trajectories.csv",
                  trajectories_csv(log, n_followers))
    _atomic_write(outdir / "events.csv", events_csv(log))
    _atomic_write(outdir / "inputs.csv", inputs_csv(log))
    _atomic_write(outdir / "summary.json", summary_json(scenario, log))
    for name, text in plotdata_files(log, n_followers).items():
        _atomic_write(outdir / "plotdata" / name, text)
    return 0 if log.status == "converged" else 1


def load_trace_csv(path, scenario: Scenario) -> Trace:
    """Rebuild the stacked position trace from a trajectories.csv."""
    from .plant import follower_model

    rows = Path(path).read_text().strip().splitlines()
    headers = rows[0].split(",")
    data = np.array([[float(v) for v in line.split(",")]
                     for line in rows[1:]])
    q = len(scenario.followers)
    cols = {h: k for k, h in enumerate(headers)}
    c_f = follower_model().c
    stacked = np.zeros((data.shape[0], 3 * (q + 1)))
    stacked[:, 0:3] = data[:, [cols["y0_x"], cols["y0_y"], cols["y0_z"]]]
    for i in range(1, q + 1):
        xhat = data[:, [cols[f"f{i}_xhat1"], cols[f"f{i}_xhat2"],
                        cols[f"f{i}_xhat3"]]]
        stacked[:, 3 * i:3 * i + 3] = xhat @ c_f.T
    return Trace(stacked, scenario.ts, dim=3, n_followers=q)


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    if args.horizon is not None:
        scenario.horizon = args.horizon
    if args.step_cap is not None:
        scenario.step_cap = args.step_cap
    if args.node_limit is not None:
        scenario.node_limit = args.node_limit
    if args.solver is not None:
        scenario.solver = args.solver
    code = run_and_emit(scenario, args.out)
    summary = json.loads((Path(args.out) / "summary.json").read_text())
    print(f"{scenario.name}: {summary['status']} after {summary['steps']} steps; "
          f"weakly satisfied: {summary['verdict']['weakly_satisfied']}")
    return code


def cmd_check(args) -> int:
    scenario = load_scenario(args.scenario)
    print(f"{scenario.name}: OK")
    print(f"  lam_max(C) = {scenario.derived['lam_max_c']:.6g}")
    for i, info in sorted(scenario.derived["followers"].items()):
        print(f"  follower {i}: lam_max(A) = {info['lam_max_a']:.6g}, "
              f"max dwell = {info['max_dwell_s']:.4f} s, "
              f"min dwell(0) = {info['min_dwell0_s']:.4f} s, "
              f"n = {info['n']}, m0 = {info['m0']}")
    return 0


def cmd_monitor(args) -> int:
    scenario = load_scenario(args.scenario)
    atoms = atom_table(scenario)
    text = Path(args.phi).read_text().strip()
    formula = parse(text, atoms)
    trace = load_trace_csv(args.trajectories, scenario)
    weak = eval_weak(trace, 0, formula, atoms)
    strong = eval_strong(trace, 0, formula, atoms)
    print(f"weak: {'satisfied' if weak else 'violated'}")
    print(f"strong: {'satisfied' if strong else 'violated'}")
    return 0 if weak else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mtlmas",
        description="Leader-follower controller synthesis with intermittent "
                    "communication under MTL constraints")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write outputs")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--horizon", type=int)
    p_run.add_argument("--step-cap", type=int, dest="step_cap")
    p_run.add_argument("--node-limit", type=int, dest="node_limit")
    p_run.add_argument("--solver", choices=["auto", "builtin", "highs"])
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="validate a scenario file")
    p_check.add_argument("scenario")
    p_check.set_defaults(func=cmd_check)

    p_mon = sub.add_parser("monitor",
                           help="offline weak/strong verdicts for a trace")
    p_mon.add_argument("trajectories")
    p_mon.add_argument("phi")
    p_mon.add_argument("--scenario", required=True,
                       help="scenario file defining the atoms")
    p_mon.set_defaults(func=cmd_monitor)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, SynthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
