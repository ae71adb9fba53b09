import json
from pathlib import Path

import pytest

import mtlmas
from mtlmas.cli import main

from helpers import mini_scenario_dict

SCENARIO_DIR = Path(mtlmas.__file__).parent / "scenarios"


@pytest.fixture
def mini_path(tmp_path):
    p = tmp_path / "mini.json"
    p.write_text(json.dumps(mini_scenario_dict()))
    return p


@pytest.fixture(scope="module")
def mini_outdir(tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    p = tmp_path_factory.mktemp("sc") / "mini.json"
    p.write_text(json.dumps(mini_scenario_dict()))
    code = main(["run", str(p), "--out", str(out)])
    assert code == 0
    return out, p


def test_check_command(capsys):
    code = main(["check", str(SCENARIO_DIR / "scenario1.json")])
    out = capsys.readouterr().out
    assert code == 0
    assert "n = 6" in out
    assert "max dwell = 3.2581" in out


def test_check_rejects_bad_scenario(tmp_path, capsys):
    doc = mini_scenario_dict(v_t=10.0)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code = main(["check", str(p)])
    assert code == 2
    assert "V_T" in capsys.readouterr().err


def test_run_emits_all_outputs(mini_outdir):
    out, _ = mini_outdir
    for name in ("trajectories.csv", "events.csv", "inputs.csv",
                 "summary.json"):
        assert (out / name).exists()
    for name in ("fig_a_inputs.csv", "fig_b_planar.csv",
                 "fig_c_e1_norms.csv", "fig_d_e2_norms.csv"):
        assert (out / "plotdata" / name).exists()


def test_csv_schemas_locked(mini_outdir):
    out, _ = mini_outdir
    headers = (out / "trajectories.csv").read_text().splitlines()[0]
    assert headers == ("t,y0_x,y0_y,y0_z,f1_x1,f1_x2,f1_x3,"
                       "f1_xhat1,f1_xhat2,f1_xhat3,f1_e1,f1_e2")
    headers = (out / "events.csv").read_text().splitlines()[0]
    assert headers == ("step,t,follower,pre_e1,pre_e2,post_e2,"
                       "m_new,true_distance")
    headers = (out / "inputs.csv").read_text().splitlines()[0]
    assert headers == "step,t,u1,u2,u3,u4"


def test_summary_contents(mini_outdir):
    out, _ = mini_outdir
    doc = json.loads((out / "summary.json").read_text())
    assert doc["status"] == "converged"
    assert doc["verdict"]["weakly_satisfied"] is True
    assert doc["scenario"]["name"] == "mini"
    assert doc["service_counts"]["1"] >= 1
    assert all(rec["status"] == "Optimal" for rec in doc["objective_history"])


def test_summary_scenario_replays_identically(mini_outdir, tmp_path):
    out, _ = mini_outdir
    doc = json.loads((out / "summary.json").read_text())
    replay = tmp_path / "replay.json"
    replay.write_text(json.dumps(doc["scenario"]))
    out2 = tmp_path / "out2"
    assert main(["run", str(replay), "--out", str(out2)]) == 0
    for name in ("trajectories.csv", "events.csv", "inputs.csv"):
        assert (out2 / name).read_bytes() == (out / name).read_bytes()


def test_monitor_on_emitted_trace(mini_outdir, tmp_path, capsys):
    out, scenario_path = mini_outdir
    phi = tmp_path / "phi.txt"
    phi.write_text("G inD\n")
    code = main(["monitor", str(out / "trajectories.csv"), str(phi),
                 "--scenario", str(scenario_path)])
    assert code == 0
    assert "weak: satisfied" in capsys.readouterr().out

    phi.write_text("F0\n")
    code = main(["monitor", str(out / "trajectories.csv"), str(phi),
                 "--scenario", str(scenario_path)])
    assert code == 1


def test_run_with_seed_override(mini_path, tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(mini_path), "--out", str(out), "--seed", "3"]) == 0
    doc = json.loads((out / "summary.json").read_text())
    assert doc["scenario"]["seed"] == 3
