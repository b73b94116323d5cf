import json
import subprocess
import sys

import pytest

from gwpack.cli import EXIT_CODES, SCENARIO_SCHEMA, main

RESIZE = {"version": "1", "initial": {"ground": {"omega": 2.0}},
          "task": {"kind": "design-resize", "omega": 2.0, "omega_c": 1.0}}
INFEASIBLE = {"version": "1", "initial": {"delta_sq": 0.5, "tw": 0.2},
              "task": {"kind": "design-linewidth", "omega": 1.0,
                       "target": {"delta_y_sq": 0.5, "tw": 1.0}}}
TRIGGER = {"version": "1",
           "task": {"kind": "trigger", "omega": 50.0, "rabi": 0.05, "k0": 1.0, "k1": 0.0,
                    "dt": 1.0, "fock_dim": 30}}


def _run(tmp_path, doc, cmd, *extra, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    out = tmp_path / f"out-{cmd}-{name}"
    code = main([cmd, "--scenario", str(path), "--out", str(out), *extra])
    return code, json.loads((out / "results.json").read_text()), out


def test_resize_verifies_against_grid(tmp_path):
    code, res, out = _run(tmp_path, RESIZE, "verify")
    assert code == 0
    assert res["status"] == "ok"
    assert res["final"]["delta_sq"] == pytest.approx(1.0, rel=1e-12)
    assert res["verification"]["passed"]
    assert (out / "trajectory.csv").read_text().startswith("t,x_center")


def test_unreachable_design_exits_4_with_diagnostics(tmp_path):
    code, res, _ = _run(tmp_path, INFEASIBLE, "design")
    assert code == 4
    det = res["error"]["details"]
    assert {"A0", "B0", "n_o_sq"} <= det.keys()
    assert det["n_o_sq"] < 0


def test_schema_violation_exits_3(tmp_path):
    bad = {**RESIZE, "task": {**RESIZE["task"], "omega_c": -1.0}}
    code, res, _ = _run(tmp_path, bad, "design")
    assert code == 3
    assert res["error"]["type"] == "ScenarioError"


def test_task_under_wrong_subcommand_exits_3(tmp_path):
    assert _run(tmp_path, RESIZE, "trigger")[0] == 3


def test_focal_forced_segment_exits_5(tmp_path):
    doc = {"version": "1", "initial": {"delta_sq": 0.5},
           "task": {"kind": "evolve", "segments": [
               {"type": "forced_harmonic", "omega": 1.0, "T": 3.141592653589793,
                "force": {"kind": "constant", "f0": 1.0}}]}}
    assert _run(tmp_path, doc, "evolve")[0] == 5


def test_missing_file_exits_8(tmp_path):
    assert main(["evolve", "--scenario", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")]) == 8


def test_bad_command_line_exits_2(capsys):
    assert main(["evolve"]) == 2


def test_output_is_bit_identical_across_runs(tmp_path):
    doc = {"version": "1", "initial": {"delta_sq": 0.3, "x_center": 0.2, "tw": 0.1},
           "task": {"kind": "evolve", "segments": [
               {"type": "free", "T": 0.7},
               {"type": "forced_harmonic", "omega": 1.3, "T": 1.1,
                "force": {"kind": "sinusoid", "f0": 0.2, "omega_d": 0.9}}]},
           "output": {"snapshot": 0.25}}
    _, _, a = _run(tmp_path, doc, "evolve", name="a.json")
    _, _, b = _run(tmp_path, doc, "evolve", name="b.json")
    for f in ("results.json", "trajectory.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_final_state_round_trips_as_new_initial(tmp_path):
    doc = {"version": "1", "initial": {"delta_sq": 0.3, "mean_momentum": 0.4},
           "task": {"kind": "evolve", "segments": [{"type": "harmonic", "omega": 1.0,
                                                     "T": 0.6}]}}
    _, first, _ = _run(tmp_path, doc, "evolve", name="a.json")
    again = {**doc, "initial": first["final"],
             "task": {"kind": "evolve", "segments": [{"type": "harmonic", "omega": 1.0,
                                                       "T": 0.4}]}}
    _, second, _ = _run(tmp_path, again, "evolve", name="b.json")
    whole = {**doc, "task": {"kind": "evolve", "segments": [{"type": "harmonic",
                                                              "omega": 1.0, "T": 1.0}]}}
    _, ref, _ = _run(tmp_path, whole, "evolve", name="c.json")
    for k in ("x_center", "mean_momentum", "delta_sq", "tw", "global_phase"):
        assert second["final"][k] == pytest.approx(ref["final"][k], abs=1e-13)


def test_trigger_branch_kicks(tmp_path):
    code, res, _ = _run(tmp_path, TRIGGER, "verify")
    assert code == 0
    kicks = {r["branch"]: r["fitted"]["mean_momentum"] for r in res["records"]}
    assert abs(kicks["g1"]) < 1e-10
    assert kicks["g0"] > 0 > kicks["e"]


def test_tight_tolerance_reports_verification_failure(tmp_path):
    code, res, _ = _run(tmp_path, TRIGGER, "verify", "--tolerance", "1e-6")
    assert code == 6
    assert res["status"] == "verification_failed"


def test_schema_subcommand_prints_json(capsys):
    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out) == json.loads(json.dumps(SCENARIO_SCHEMA))


def test_every_exit_code_is_documented():
    assert set(EXIT_CODES) == {0, 2, 3, 4, 5, 6, 7, 8}


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "gwpack", "schema"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and '"$schema"' in r.stdout
