"""Scenario runner: ``gwpack {evolve,design,trigger,verify,schema}``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from typing import Any

import jsonschema

from . import __version__
from .core import GaussianState, ground_state, make_gaussian
from .design import LinewidthTarget, quarter_period_resize, solve_two_pulse
from .errors import (DomainError, GwpackError, InfeasibleError, NumericError,
                     SingularityError, VerificationError)
from .evolve import evolve_schedule
from .propagators import (ForcedHarmonic, ForceSpec, Free, GeneralQuadratic, Harmonic,
                          InverseFree, InverseHarmonic, inverse_free_sandwich)

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_INFEASIBLE = 4
EXIT_NUMERIC = 5
EXIT_VERIFY = 6
EXIT_DOMAIN = 7
EXIT_IO = 8

EXIT_CODES = {
    EXIT_OK: "success",
    EXIT_USAGE: "bad command line",
    EXIT_SCHEMA: "scenario failed schema validation or is inconsistent",
    EXIT_INFEASIBLE: "design target cannot be reached",
    EXIT_NUMERIC: "numerical failure (singular point, quadrature, truncation, grid)",
    EXIT_VERIFY: "oracle cross-check outside tolerance",
    EXIT_DOMAIN: "physical input outside the valid domain",
    EXIT_IO: "scenario unreadable or output not writable",
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}


def _obj(props, required=(), **extra):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False, **extra}


_FORCE = {"oneOf": [
    _obj({"kind": {"const": "constant"}, "f0": _NUM}, ["kind", "f0"]),
    _obj({"kind": {"const": "sinusoid"}, "f0": _NUM, "omega_d": _NUM, "phi_d": _NUM},
         ["kind", "f0", "omega_d"]),
    _obj({"kind": {"const": "tabulated"},
          "times": {"type": "array", "items": _NUM, "minItems": 2},
          "values": {"type": "array", "items": _NUM, "minItems": 2},
          "rule": {"enum": ["linear", "cubic"]}}, ["kind", "times", "values"]),
]}

_SEGMENT = {"oneOf": [
    _obj({"type": {"const": "free"}, "T": _POS}, ["type", "T"]),
    _obj({"type": {"const": "inverse_free"}, "T": _POS}, ["type", "T"]),
    _obj({"type": {"const": "harmonic"}, "omega": _POS, "T": _POS}, ["type", "omega", "T"]),
    _obj({"type": {"const": "inverse_harmonic"}, "omega": _POS, "T_prime": _POS,
          "k": {"type": "integer", "minimum": 1}}, ["type", "omega", "T_prime"]),
    _obj({"type": {"const": "forced_harmonic"}, "omega": _POS, "T": _POS, "force": _FORCE},
         ["type", "omega", "T", "force"]),
    _obj({"type": {"const": "general"}, "T": _POS, "c": _NUM, "d": _NUM, "f": _NUM},
         ["type", "T"]),
]}

_STATE = _obj({"mass": _POS, "hbar": _POS, "x_center": _NUM, "mean_momentum": _NUM,
               "delta_sq": _POS, "tw": _NUM,
               "global_phase": {"type": ["number", "null"]}}, ["delta_sq"])

_GROUND = _obj({"ground": _obj({"omega": _POS, "x_center": _NUM, "mean_momentum": _NUM},
                               ["omega"])}, ["ground"])

_TASK = {"oneOf": [
    _obj({"kind": {"const": "evolve"}, "segments": {"type": "array", "items": _SEGMENT,
                                                     "minItems": 1}},
         ["kind", "segments"]),
    _obj({"kind": {"const": "design-linewidth"}, "omega": _POS,
          "target": _obj({"delta_y_sq": _POS, "tw": _NUM}, ["delta_y_sq", "tw"])},
         ["kind", "omega", "target"]),
    _obj({"kind": {"const": "design-resize"}, "omega": _POS, "omega_c": _POS,
          "k": {"type": "integer", "minimum": 0}}, ["kind", "omega", "omega_c"]),
    _obj({"kind": {"const": "design-inverse-free"}, "T": _POS, "omega1": _POS,
          "omega2": _POS, "branch": {"enum": ["upper", "lower"]}},
         ["kind", "T", "omega1", "omega2"]),
    _obj({"kind": {"const": "trigger"}, "omega": _POS, "rabi": _NUM, "k0": _NUM, "k1": _NUM,
          "alpha": _NUM, "dt": _POS, "variant": {"enum": ["basic", "improved", "realizable"]},
          "branches": {"type": "array", "items": {"enum": ["g0", "g1", "e"]}, "minItems": 1},
          "fock_dim": {"type": "integer", "minimum": 8}},
         ["kind", "omega", "rabi", "k0", "k1", "dt"]),
]}

SCENARIO_SCHEMA = _obj({
    "version": {"const": SCHEMA_VERSION},
    "units": _obj({"m": _POS, "hbar": _POS}),
    "initial": {"oneOf": [_STATE, _GROUND]},
    "task": _TASK,
    "verify": _obj({"dt": _POS, "n_points": {"type": "integer", "minimum": 256},
                    "tolerance": _POS}),
    "output": _obj({"snapshot": {"oneOf": [{"enum": ["segment", "none"]}, _POS]}}),
}, ["version", "task"])
SCENARIO_SCHEMA["$schema"] = "https://json-schema.org/draft/2020-12/schema"

_SUBCOMMAND_TASKS = {
    "evolve": {"evolve"},
    "design": {"design-linewidth", "design-resize", "design-inverse-free"},
    "trigger": {"trigger"},
    "verify": {"evolve", "design-linewidth", "design-resize", "design-inverse-free",
               "trigger"},
}


class ScenarioError(GwpackError):
    """Scenario file is malformed or inconsistent."""


# ------------------------------------------------------------------ serialization

def _fmt(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return json.dumps(str(x))
        s = "%.17g" % x
        if "." not in s and "e" not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return json.dumps(x)
    if hasattr(x, "item") and not isinstance(x, (list, dict)):
        return _fmt(x.item())
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()]
        return "{" + ", ".join(items) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, complex):
        return _fmt({"re": x.real, "im": x.imag})
    return json.dumps(str(x))


def dumps(doc) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _fmt(doc) + "\n"


# ------------------------------------------------------------------ scenario parsing

def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}", kind="io") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}", line=exc.lineno) from exc
    validate(doc)
    return doc


def validate(doc):
    v = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ScenarioError(f"schema violation: {best.message}",
                            path="/".join(str(p) for p in best.absolute_path))


def _units(doc):
    u = doc.get("units", {})
    return float(u.get("m", 1.0)), float(u.get("hbar", 1.0))


def initial_state(doc) -> GaussianState:
    m, hbar = _units(doc)
    init = doc.get("initial")
    if init is None:
        raise ScenarioError("an initial state is required for this task")
    if "ground" in init:
        g = init["ground"]
        return ground_state(g["omega"], m, hbar, g.get("x_center", 0.0),
                            g.get("mean_momentum", 0.0))
    for key, val in (("mass", m), ("hbar", hbar)):
        if key in init and init[key] != val:
            raise ScenarioError(f"initial {key} disagrees with the units block",
                                initial=init[key], units=val)
    return make_gaussian(m, hbar, init.get("x_center", 0.0), init.get("mean_momentum", 0.0),
                         init["delta_sq"], init.get("tw", 0.0),
                         init.get("global_phase", 0.0))


def _force(spec):
    kind = spec["kind"]
    if kind == "constant":
        return ForceSpec.constant(spec["f0"])
    if kind == "sinusoid":
        return ForceSpec.sinusoid(spec["f0"], spec["omega_d"], spec.get("phi_d", 0.0))
    return ForceSpec.tabulated(spec["times"], spec["values"], spec.get("rule", "cubic"))


def build_segment(spec):
    t = spec["type"]
    if t == "free":
        return Free(spec["T"])
    if t == "inverse_free":
        return InverseFree(spec["T"])
    if t == "harmonic":
        return Harmonic(spec["omega"], spec["T"])
    if t == "inverse_harmonic":
        return InverseHarmonic(spec["omega"], spec["T_prime"], spec.get("k", 1))
    if t == "forced_harmonic":
        return ForcedHarmonic(spec["omega"], _force(spec["force"]), spec["T"])
    return GeneralQuadratic(spec["T"], 0.0, spec.get("c", 0.0), spec.get("d", 0.0),
                            spec.get("f", 0.0))


def segment_record(seg):
    d = {"type": type(seg).__name__}
    for k, v in seg.__dict__.items():
        d[k] = v.to_dict() if isinstance(v, ForceSpec) else v
    return d


# ------------------------------------------------------------------ task runners

def _schedule(doc, s0):
    """Segments and diagnostics of an evolve or design task."""
    task = doc["task"]
    kind = task["kind"]
    m, hbar = s0.mass, s0.hbar
    if kind == "evolve":
        return [build_segment(sp) for sp in task["segments"]], {}
    if kind == "design-resize":
        T_c, dsq = quarter_period_resize(task["omega"], task["omega_c"], m, hbar,
                                         task.get("k", 0))
        return [Harmonic(task["omega_c"], T_c)], {"T_c": T_c, "predicted_delta_sq": dsq}
    if kind == "design-linewidth":
        tg = task["target"]
        sol = solve_two_pulse(LinewidthTarget(tg["delta_y_sq"], tg["tw"]), s0.delta_sq,
                              task["omega"], s0.tw, m, hbar)
        diag = {"T": sol.T, "omega_o": sol.omega_o, "T_o": sol.T_o, "A0": sol.A0,
                "B0": sol.B0, "n_o": sol.n_o, "branch": sol.branch,
                "achieved": {"delta_y_sq": sol.achieved[0], "tw": sol.achieved[1]},
                "constraint_residual": sol.constraint_residual()}
        return sol.segments(), diag
    if kind == "design-inverse-free":
        sol = inverse_free_sandwich(task["T"], task["omega1"], task["omega2"],
                                    task.get("branch", "upper"), True, m, hbar)
        return sol.segments(), {"T1": sol.T1, "T2": sol.T2, "branch": sol.branch,
                                "residuals": list(sol.residuals())}
    raise ScenarioError(f"task {kind!r} has no segment schedule")


def run_schedule_task(doc, verify=False, tolerance=None):
    s0 = initial_state(doc)
    segments, diag = _schedule(doc, s0)
    snap = doc.get("output", {}).get("snapshot", "segment")
    rule = "segment" if snap in ("segment", "none") else float(snap)
    traj = evolve_schedule(segments, s0, snapshot_rule=rule)
    out = {"task": doc["task"]["kind"], "initial": s0.to_dict(),
           "segments": [segment_record(s) for s in segments], "diagnostics": diag,
           "final": traj.final.to_dict()}
    table = None
    if snap != "none":
        table = [(t, s) for t, s in zip(traj.times, traj.states)]
    if verify:
        from .verify import verify_schedule

        vb = doc.get("verify", {})
        tol = tolerance if tolerance is not None else vb.get("tolerance", 1e-6)
        _, rep = verify_schedule(segments, s0, vb.get("dt", 1e-3), vb.get("n_points"))
        out["verification"] = {"oracle": "grid", "tolerance": tol, **rep.to_dict()}
        out["verification"]["passed"] = bool(1.0 - rep.fidelity <= tol)
    return out, table


def run_trigger_task(doc, verify=False, tolerance=None):
    from .trigger import (FockBasis, MatchedDrive, apply_trigger, compile_Q_sequence)

    task = doc["task"]
    m, hbar = _units(doc)
    omega = task["omega"]
    N = task.get("fock_dim", 40)
    d = MatchedDrive.from_wavevectors(task.get("alpha", math.pi / 4), 0.0, task["rabi"],
                                      task["k0"], task["k1"])
    prog = compile_Q_sequence(d, task["dt"], task.get("variant", "realizable"))
    basis = FockBasis(N, omega, m, hbar)
    s0 = initial_state(doc) if "initial" in doc else ground_state(omega, m, hbar)
    p_formula = hbar * 4.0 * task["rabi"] ** 2 * (task["k0"] - task["k1"]) * task["dt"] ** 2
    records = []
    for label in task.get("branches", ["g1", "g0", "e"]):
        res = apply_trigger(prog, d, (label, s0), basis, fit_levels=[label])
        fit = res.fits[label]
        expected = {"g1": 0.0, "g0": p_formula, "e": -p_formula}[label]
        records.append({"branch": label, "populations": res.populations,
                        "fidelity_with_initial": res.fidelity_with_initial,
                        "fitted": fit.state.to_dict(), "fit_residual": fit.residual,
                        "expected_kick": s0.mean_momentum + expected})
    out = {"task": "trigger", "program": prog.describe(), "error_order": prog.error_order,
           "realizable": prog.realizable, "records": records}
    if verify:
        tol = tolerance if tolerance is not None else doc.get("verify", {}).get(
            "tolerance", 0.05)
        checks = []
        for r in records:
            if r["branch"] == "g1":
                ok = 1.0 - r["fidelity_with_initial"] <= 1e-10
                checks.append({"branch": "g1", "infidelity": 1.0 - r["fidelity_with_initial"],
                               "passed": ok})
            else:
                got = r["fitted"]["mean_momentum"] - s0.mean_momentum
                want = r["expected_kick"] - s0.mean_momentum
                rel = abs(got - want) / abs(want) if want else abs(got)
                checks.append({"branch": r["branch"], "relative_kick_error": rel,
                               "passed": rel <= tol})
        out["verification"] = {"oracle": "fock", "tolerance": tol, "checks": checks,
                               "passed": all(c["passed"] for c in checks)}
    return out, None


# ------------------------------------------------------------------ entry point

def _write_table(path, table):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x_center", "mean_momentum", "delta_sq", "tw", "global_phase"])
        for t, s in table:
            ph = "%.17g" % s.global_phase if s.phase_tracked else ""
            w.writerow(["%.17g" % v for v in (t, s.x_center, s.mean_momentum, s.delta_sq,
                                              s.tw)] + [ph])


def _exit_code(exc):
    if isinstance(exc, ScenarioError):
        return EXIT_IO if exc.details.get("kind") == "io" else EXIT_SCHEMA
    if isinstance(exc, InfeasibleError):
        return EXIT_INFEASIBLE
    if isinstance(exc, VerificationError):
        return EXIT_VERIFY
    if isinstance(exc, (NumericError, SingularityError)):
        return EXIT_NUMERIC
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    return EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(prog="gwpack",
                                description="Gaussian packet propagation and pulse design")
    p.add_argument("--version", action="version", version=f"gwpack {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("evolve", "design", "trigger", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--tolerance", type=float, default=None,
                        help="override the verification threshold")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for randomized scenarios (recorded in the output)")
    sub.add_parser("schema", help="print the scenario schema")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if args.command == "schema":
        sys.stdout.write(json.dumps(SCENARIO_SCHEMA, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    out_dir = args.out
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        sys.stderr.write(f"gwpack: cannot create output directory: {exc}\n")
        return EXIT_IO
    result_path = os.path.join(out_dir, "results.json")
    doc = None
    try:
        doc = load_scenario(args.scenario)
        kind = doc["task"]["kind"]
        if kind not in _SUBCOMMAND_TASKS[args.command]:
            raise ScenarioError(f"task {kind!r} cannot run under '{args.command}'",
                                allowed=sorted(_SUBCOMMAND_TASKS[args.command]))
        verify = args.command == "verify"
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if kind == "trigger":
                body, table = run_trigger_task(doc, verify, args.tolerance)
            else:
                body, table = run_schedule_task(doc, verify, args.tolerance)
        body["warnings"] = sorted({str(w.message) for w in caught})
        result = {"version": SCHEMA_VERSION, "command": args.command, "status": "ok",
                  "seed": args.seed, **body}
        code = EXIT_OK
        if verify and not body["verification"]["passed"]:
            result["status"] = "verification_failed"
            code = EXIT_VERIFY
        if table is not None:
            _write_table(os.path.join(out_dir, "trajectory.csv"), table)
    except GwpackError as exc:
        code = _exit_code(exc)
        result = {"version": SCHEMA_VERSION, "command": args.command, "status": "error",
                  "error": {"type": type(exc).__name__, "message": str(exc),
                            "details": exc.details, "exit_code": code,
                            "meaning": EXIT_CODES[code]}}
        sys.stderr.write(f"gwpack: {type(exc).__name__}: {exc}\n")
    try:
        with open(result_path, "w", encoding="utf-8") as fh:
            fh.write(dumps(result))
    except OSError as exc:
        sys.stderr.write(f"gwpack: cannot write results: {exc}\n")
        return EXIT_IO
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
