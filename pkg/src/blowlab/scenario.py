"""Configuration-driven scenario execution.

A scenario file is strict line-oriented key = value text in [sections]:

    [scenario]
    name = kg-bump
    seed = 42

    [model]
    kind = klein_gordon
    L = 6.283185307179586
    n = 127
    mass = 1.0
    p = 2.0

    [data]
    u0 = bump 3.0 0.5 0.12
    u1 = u0_squared_over_sqrt2

    [run]
    dt0 = 1e-3
    t_max = 30
    psi_cap = 1e9
    record_every = 20
    adapt = true

    [checks]
    assert = criteria_satisfied blew_up

Unknown sections or keys are errors naming the offender and its line.
Exactly one data source is allowed: direct vectors/shapes (u0, u1) or the
positive-energy builder (K2 with seed0/seed1).  Random content (the noise
shape) draws only from the mandatory scenario seed, so identical files
always produce byte-identical outputs.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import criteria as _criteria
from .data_builder import BuiltData, build_positive_energy_data, normalize_pair
from .diagnostics import (
    Trajectory,
    check_growth_vs_bound,
    check_inf1,
    energy_drift,
    first_threshold_index,
)
from .integrator import BLEW_UP, SURVIVED, BlowupVerdict, RunConfig, run
from .models import ModelSpec, make_boussinesq, make_klein_gordon, \
    make_nonlinear_boundary, make_plate, make_scalar_ode
from .nonlinearity import Nonlinearity, power_nl

__all__ = [
    "ScenarioError",
    "Scenario",
    "MonitorResult",
    "RunReport",
    "parse_scenario",
    "serialize_scenario",
    "build_model",
    "resolve_data",
    "run_scenario",
    "write_outputs",
    "MONITOR_NAMES",
]

CSV_HEADER = "t,psi,dpsi,ddpsi_eq,E,defect,inf2_rhs"

MONITOR_NAMES = (
    "criteria_satisfied",
    "criteria_unsatisfied",
    "blew_up",
    "survived",
    "energy_drift_rel",
    "defect_past_tstar",
    "inf2_past_tstar",
    "inf1_margin",
    "growth_bound",
)

_SHAPES_1D = ("constant", "sine", "bump", "noise")


class ScenarioError(ValueError):
    """Malformed scenario file or unsatisfiable scenario contents."""


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    model: dict
    data: dict
    run: dict
    checks: tuple[str, ...] = ()
    check_params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MonitorResult:
    passed: bool | None          # None: not evaluated (criteria-only mode)
    worst_margin: float
    detail: str = ""


@dataclass(frozen=True)
class RunReport:
    scenario_name: str
    model_kind: str
    criteria: _criteria.CriteriaReport
    verdict: BlowupVerdict | None
    monitor_results: dict
    built: BuiltData | None = None
    csv_path: str | None = None
    report_path: str | None = None

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.monitor_results.values()
                   if r.passed is not None)


# ---------------------------------------------------------------------------
# parsing

_BOOL = {"true": True, "false": False}


def _fail(lineno: int, msg: str):
    raise ScenarioError(f"line {lineno}: {msg}")


def _to_float(tok: str, lineno: int, key: str) -> float:
    try:
        return float(tok)
    except ValueError:
        _fail(lineno, f"key {key!r}: expected a number, got {tok!r}")


def _to_int(tok: str, lineno: int, key: str) -> int:
    try:
        return int(tok)
    except ValueError:
        _fail(lineno, f"key {key!r}: expected an integer, got {tok!r}")


def _to_bool(tok: str, lineno: int, key: str) -> bool:
    if tok.lower() not in _BOOL:
        _fail(lineno, f"key {key!r}: expected true/false, got {tok!r}")
    return _BOOL[tok.lower()]


def _data_value(tokens: list[str], lineno: int, key: str):
    """A data entry: explicit numbers, or a shape name plus numeric params."""
    if not tokens:
        _fail(lineno, f"key {key!r}: empty value")
    try:
        float(tokens[0])
    except ValueError:
        name = tokens[0]
        if name not in _SHAPES_1D + ("u0_squared_over_sqrt2",):
            _fail(lineno, f"key {key!r}: unknown shape {name!r}")
        params = tuple(_to_float(t, lineno, key) for t in tokens[1:])
        return ("shape", name, params)
    return ("vec", tuple(_to_float(t, lineno, key) for t in tokens))


def parse_scenario(path: str) -> Scenario:
    """Strictly parse a scenario file; unknown keys or sections are errors."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    sections: dict[str, dict] = {}
    current = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in ("scenario", "model", "data", "run", "checks"):
                _fail(lineno, f"unknown section [{name}]")
            if name in sections:
                _fail(lineno, f"duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if current is None:
            _fail(lineno, "key outside of any [section]")
        if "=" not in line:
            _fail(lineno, f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            _fail(lineno, "empty key")
        if key in sections[current]:
            _fail(lineno, f"duplicate key {key!r} in [{current}]")
        sections[current][key] = (value.split(), lineno)

    for required in ("scenario", "model", "data", "run"):
        if required not in sections:
            raise ScenarioError(f"missing required section [{required}]")

    scenario_kv = sections["scenario"]
    known = {"name", "seed"}
    for key, (_, lineno) in scenario_kv.items():
        if key not in known:
            _fail(lineno, f"unknown key {key!r} in [scenario]")
    if "name" not in scenario_kv:
        raise ScenarioError("[scenario] needs a name")
    if "seed" not in scenario_kv:
        raise ScenarioError("[scenario] needs an explicit seed")
    name = " ".join(scenario_kv["name"][0])
    seed = _to_int(scenario_kv["seed"][0][0], scenario_kv["seed"][1], "seed")

    model = _parse_model(sections["model"])
    data = _parse_data(sections["data"])
    run_block = _parse_run(sections["run"])
    checks, check_params = _parse_checks(sections.get("checks", {}))
    return Scenario(name=name, seed=seed, model=model, data=data,
                    run=run_block, checks=checks, check_params=check_params)


_MODEL_SCHEMAS = {
    "klein_gordon": {"L": "floats", "n": "ints", "mass": "float", "p": "float",
                     "linear": "bool?", "cauchy_guard": "float?"},
    "boussinesq": {"L": "floats", "n": "ints", "a": "float?", "nu": "float?",
                   "m": "int", "poly": "floats?"},
    "plate": {"L": "floats", "n": "ints", "a1": "float?", "a2": "float?",
              "b1": "float?", "b2": "float?", "f_m": "int?",
              "f_coeffs": "floats?"},
    "nonlinear_boundary": {"L": "float", "n": "int", "b": "float",
                           "f_m": "int?", "f_coeffs": "floats?",
                           "gamma": "token?"},
    "scalar_ode": {"a0": "float", "p": "float"},
}


def _convert(spec: str, tokens: list[str], lineno: int, key: str):
    kind = spec.rstrip("?")
    if kind == "float":
        return _to_float(tokens[0], lineno, key)
    if kind == "int":
        return _to_int(tokens[0], lineno, key)
    if kind == "bool":
        return _to_bool(tokens[0], lineno, key)
    if kind == "floats":
        vals = tuple(_to_float(t, lineno, key) for t in tokens)
        return vals[0] if len(vals) == 1 else vals
    if kind == "ints":
        vals = tuple(_to_int(t, lineno, key) for t in tokens)
        return vals[0] if len(vals) == 1 else vals
    if kind == "token":
        return tokens[0]
    raise AssertionError(spec)


def _parse_model(kv: dict) -> dict:
    if "kind" not in kv:
        raise ScenarioError("[model] needs a kind")
    kind = kv["kind"][0][0]
    if kind not in _MODEL_SCHEMAS:
        _fail(kv["kind"][1], f"unknown model kind {kind!r}")
    schema = _MODEL_SCHEMAS[kind]
    out = {"kind": kind}
    for key, (tokens, lineno) in kv.items():
        if key == "kind":
            continue
        if key not in schema:
            _fail(lineno, f"unknown key {key!r} for model kind {kind!r}")
        out[key] = _convert(schema[key], tokens, lineno, key)
    for key, spec in schema.items():
        if not spec.endswith("?") and key not in out:
            raise ScenarioError(f"[model] kind {kind!r} requires key {key!r}")
    return out


def _parse_data(kv: dict) -> dict:
    out = {}
    for key, (tokens, lineno) in kv.items():
        if key in ("u0", "u1", "seed0", "seed1"):
            out[key] = _data_value(tokens, lineno, key)
        elif key == "K2":
            out[key] = _to_float(tokens[0], lineno, key)
        else:
            _fail(lineno, f"unknown key {key!r} in [data]")
    direct = "u0" in out or "u1" in out
    builder = "K2" in out or "seed0" in out or "seed1" in out
    if direct and builder:
        raise ScenarioError("[data] mixes direct data with the builder; "
                            "exactly one data source is allowed")
    if direct and not ("u0" in out and "u1" in out):
        raise ScenarioError("[data] direct mode needs both u0 and u1")
    if builder and not ("K2" in out and "seed0" in out and "seed1" in out):
        raise ScenarioError("[data] builder mode needs K2, seed0 and seed1")
    if not direct and not builder:
        raise ScenarioError("[data] is empty")
    return out


_RUN_SCHEMA = {"dt0": "float", "t_max": "float", "psi_cap": "float?",
               "dt_floor": "float?", "record_every": "int?", "adapt": "bool?",
               "c_cfl": "float?", "c_nl": "float?"}


def _parse_run(kv: dict) -> dict:
    out = {}
    for key, (tokens, lineno) in kv.items():
        if key not in _RUN_SCHEMA:
            _fail(lineno, f"unknown key {key!r} in [run]")
        out[key] = _convert(_RUN_SCHEMA[key], tokens, lineno, key)
    for key, spec in _RUN_SCHEMA.items():
        if not spec.endswith("?") and key not in out:
            raise ScenarioError(f"[run] requires key {key!r}")
    return out


_CHECK_PARAMS = {"energy_rel_tol": 1e-4, "growth_tol": 1e-3,
                 "monitor_tol": 1e-8}


def _parse_checks(kv: dict) -> tuple[tuple[str, ...], dict]:
    names: tuple[str, ...] = ()
    params = dict(_CHECK_PARAMS)
    for key, (tokens, lineno) in kv.items():
        if key == "assert":
            for tok in tokens:
                if tok not in MONITOR_NAMES:
                    _fail(lineno, f"unknown monitor {tok!r}")
            names = tuple(tokens)
        elif key in _CHECK_PARAMS:
            params[key] = _to_float(tokens[0], lineno, key)
        else:
            _fail(lineno, f"unknown key {key!r} in [checks]")
    return names, params


# ---------------------------------------------------------------------------
# serialization

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _fmt_value(v) -> str:
    if isinstance(v, tuple) and v and v[0] == "shape":
        return " ".join([v[1]] + [_fmt(p) for p in v[2]])
    if isinstance(v, tuple) and v and v[0] == "vec":
        return " ".join(_fmt(x) for x in v[1])
    if isinstance(v, tuple):
        return " ".join(_fmt(x) for x in v)
    return _fmt(v)


def serialize_scenario(s: Scenario) -> str:
    lines = ["[scenario]", f"name = {s.name}", f"seed = {s.seed}", ""]
    lines.append("[model]")
    lines.append(f"kind = {s.model['kind']}")
    for key in sorted(k for k in s.model if k != "kind"):
        lines.append(f"{key} = {_fmt_value(s.model[key])}")
    lines.append("")
    lines.append("[data]")
    for key in ("u0", "u1", "K2", "seed0", "seed1"):
        if key in s.data:
            lines.append(f"{key} = {_fmt_value(s.data[key])}")
    lines.append("")
    lines.append("[run]")
    for key in _RUN_SCHEMA:
        if key in s.run:
            lines.append(f"{key} = {_fmt_value(s.run[key])}")
    if s.checks or s.check_params != _CHECK_PARAMS:
        lines.append("")
        lines.append("[checks]")
        if s.checks:
            lines.append("assert = " + " ".join(s.checks))
        for key in _CHECK_PARAMS:
            if s.check_params.get(key) != _CHECK_PARAMS[key]:
                lines.append(f"{key} = {_fmt(s.check_params[key])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# resolution

def build_model(s: Scenario) -> ModelSpec:
    m = dict(s.model)
    kind = m.pop("kind")
    if kind == "klein_gordon":
        return make_klein_gordon(m["L"], m["n"], m["mass"], m["p"],
                                 linear=m.get("linear", False),
                                 cauchy_guard=m.get("cauchy_guard"))
    if kind == "boussinesq":
        return make_boussinesq(m["L"], m["n"], a=m.get("a", 0.0),
                               nu=m.get("nu", 1.0), m=m["m"],
                               poly=m.get("poly", ()))
    if kind == "plate":
        f = None
        if "f_m" in m:
            coeffs = m.get("f_coeffs", ())
            coeffs = coeffs if isinstance(coeffs, tuple) else (coeffs,)
            f = Nonlinearity(kind="polynomial", alpha=m["f_m"] / 4,
                             exponent=float(m["f_m"]), poly_coeffs=coeffs)
        return make_plate(m["L"], m["n"], a1=m.get("a1", 0.0),
                          a2=m.get("a2", 0.0), b1=m.get("b1", 0.0),
                          b2=m.get("b2", 0.0), f=f)
    if kind == "nonlinear_boundary":
        f = None
        if "f_m" in m:
            coeffs = m.get("f_coeffs", ())
            coeffs = coeffs if isinstance(coeffs, tuple) else (coeffs,)
            f = Nonlinearity(kind="polynomial", alpha=m["f_m"] / 4,
                             exponent=float(m["f_m"]), poly_coeffs=coeffs)
        return make_nonlinear_boundary(m["L"], m["n"], m["b"], f,
                                       gamma_split=m.get("gamma", "both_ends"))
    if kind == "scalar_ode":
        return make_scalar_ode(m["a0"], m["p"])
    raise ScenarioError(f"unknown model kind {kind!r}")


def _resolve_shape(spec, model: ModelSpec, rng, u0=None) -> np.ndarray:
    tag = spec[0]
    if tag == "vec":
        vec = np.asarray(spec[1], dtype=float)
        if vec.shape != (model.space.dim,):
            raise ScenarioError(
                f"explicit vector has {vec.size} entries, space has "
                f"{model.space.dim} nodes")
        return vec
    name, params = spec[1], spec[2]
    space = model.space
    x = space.coords
    if name == "u0_squared_over_sqrt2":
        if u0 is None:
            raise ScenarioError("u0_squared_over_sqrt2 is only valid for u1")
        return u0**2 / math.sqrt(2.0)
    if name == "constant":
        (amp,) = params
        return np.full(space.dim, amp)
    if name == "noise":
        (amp,) = params
        return amp * rng.standard_normal(space.dim)
    if space.kind == "interval_1d":
        L = space.lengths[0]
        if name == "sine":
            amp, k = params
            return amp * np.sin(k * np.pi * x / L)
        if name == "bump":
            amp, center, width = params
            r = np.abs(x - center * L) / (width * L)
            out = np.where(r < 1.0, np.cos(0.5 * np.pi * np.minimum(r, 1.0))**2, 0.0)
            return amp * out
    else:
        Lx, Ly = space.lengths
        if name == "sine":
            amp, kx, ky = params
            return amp * np.sin(kx * np.pi * x[:, 0] / Lx) \
                * np.sin(ky * np.pi * x[:, 1] / Ly)
        if name == "bump":
            amp, cx, cy, width = params
            r = np.sqrt(((x[:, 0] - cx * Lx) / (width * Lx))**2
                        + ((x[:, 1] - cy * Ly) / (width * Ly))**2)
            return amp * np.where(r < 1.0,
                                  np.cos(0.5 * np.pi * np.minimum(r, 1.0))**2,
                                  0.0)
    raise ScenarioError(f"shape {name!r} is not available on this space")


def resolve_data(s: Scenario, model: ModelSpec):
    """Produce (u0, u1, built) for the scenario's single data source."""
    rng = np.random.default_rng(s.seed)
    if "K2" in s.data:
        v0 = _resolve_shape(s.data["seed0"], model, rng)
        v1 = _resolve_shape(s.data["seed1"], model, rng)
        pair = normalize_pair(model, v0, v1)
        built = build_positive_energy_data(model, pair, s.data["K2"])
        return built.u0, built.u1, built
    u0 = _resolve_shape(s.data["u0"], model, rng)
    u1 = _resolve_shape(s.data["u1"], model, rng, u0=u0)
    return u0, u1, None


# ---------------------------------------------------------------------------
# monitors

def _tail_scale(traj: Trajectory, i: int, alpha: float) -> float:
    return max(abs(traj.ddpsi_eq[i] * traj.psi[i]),
               (1 + alpha) * traj.dpsi[i]**2,
               abs(traj.inf2_rhs[i]), 1.0)


def _monitor_criteria(ctx, want: bool) -> MonitorResult:
    rep = ctx["criteria"]
    margin = min(rep.l1_value, rep.l2_rhs - rep.l2_lhs)
    ok = rep.satisfied if want else not rep.satisfied
    return MonitorResult(passed=ok, worst_margin=margin,
                         detail=f"l1={rep.l1_value:g}, "
                                f"l2 slack={rep.l2_rhs - rep.l2_lhs:g}")


def _monitor_verdict(ctx, want: str) -> MonitorResult:
    verdict = ctx["verdict"]
    if verdict is None:
        return MonitorResult(None, math.nan, "skipped: no simulation")
    ok = verdict.status == want
    return MonitorResult(passed=ok, worst_margin=0.0 if ok else -1.0,
                         detail=f"status={verdict.status}: {verdict.reason}")


def _monitor_energy(ctx) -> MonitorResult:
    if ctx["traj"] is None:
        return MonitorResult(None, math.nan, "skipped: no simulation")
    tol = ctx["params"]["energy_rel_tol"]
    drift = energy_drift(ctx["traj"])
    return MonitorResult(passed=drift.max_rel <= tol,
                         worst_margin=tol - drift.max_rel,
                         detail=f"rel drift {drift.max_rel:g} vs tol {tol:g}")


def _past_tstar_indices(traj: Trajectory):
    i0 = first_threshold_index(traj, 0.0)
    return range(i0, len(traj)) if i0 is not None else range(0)


def _monitor_defect(ctx) -> MonitorResult:
    traj = ctx["traj"]
    if traj is None:
        return MonitorResult(None, math.nan, "skipped: no simulation")
    tol = ctx["params"]["monitor_tol"]
    alpha = traj.model.nl.alpha
    worst = math.inf
    checked = 0
    for i in _past_tstar_indices(traj):
        scale = _tail_scale(traj, i, alpha)
        worst = min(worst, traj.defect[i] / scale)
        checked += 1
    if checked == 0:
        return MonitorResult(False, -math.inf,
                             "no samples past the concavity threshold")
    return MonitorResult(passed=worst >= -tol, worst_margin=worst,
                         detail=f"{checked} samples past threshold")


def _monitor_inf2(ctx) -> MonitorResult:
    traj = ctx["traj"]
    if traj is None:
        return MonitorResult(None, math.nan, "skipped: no simulation")
    tol = ctx["params"]["monitor_tol"]
    alpha = traj.model.nl.alpha
    worst = math.inf
    checked = 0
    for i in _past_tstar_indices(traj):
        scale = _tail_scale(traj, i, alpha)
        worst = min(worst, (traj.defect[i] - traj.inf2_rhs[i]) / scale)
        checked += 1
    if checked == 0:
        return MonitorResult(False, -math.inf,
                             "no samples past the concavity threshold")
    return MonitorResult(passed=worst >= -tol, worst_margin=worst,
                         detail=f"{checked} samples past threshold")


def _monitor_inf1(ctx) -> MonitorResult:
    traj = ctx["traj"]
    if traj is None:
        return MonitorResult(None, math.nan, "skipped: no simulation")
    tol = ctx["params"]["monitor_tol"]
    margins = check_inf1(traj)
    worst = math.inf
    for i in range(len(traj)):
        scale = max(abs(traj.ddpsi_eq[i]), abs(traj.ddpsi_eq[i] - margins[i]), 1.0)
        worst = min(worst, margins[i] / scale)
    return MonitorResult(passed=worst >= -tol, worst_margin=worst,
                         detail=f"{len(traj)} samples")


def _monitor_growth(ctx) -> MonitorResult:
    traj = ctx["traj"]
    verdict = ctx["verdict"]
    if traj is None:
        return MonitorResult(None, math.nan, "skipped: no simulation")
    tol = ctx["params"]["growth_tol"]
    i0 = first_threshold_index(traj, 0.0)
    while i0 is not None and i0 < len(traj) and traj.dpsi[i0] <= 0:
        i0 += 1
    if i0 is None or i0 >= len(traj):
        return MonitorResult(False, -math.inf,
                             "no sample certifies the concavity hypotheses")
    curve = _criteria.GrowthCurve(t0=float(traj.t[i0]),
                                  psi_t0=float(traj.psi[i0]),
                                  dpsi_t0=float(traj.dpsi[i0]),
                                  alpha=traj.model.nl.alpha)
    rep = check_growth_vs_bound(traj, curve, tol)
    detail = (f"t0={curve.t0:g}, bound={curve.blowup_time_upper:g}, "
              f"min ratio={rep.min_ratio:g}")
    ok = rep.passed
    margin = rep.min_ratio - (1 - tol)
    if verdict is not None and verdict.status == BLEW_UP:
        dt0 = ctx["scenario"].run["dt0"]
        slack = curve.blowup_time_upper + dt0 - verdict.t_detect
        ok = ok and slack >= 0
        margin = min(margin, slack)
        detail += f", detect slack={slack:g}"
    return MonitorResult(passed=ok, worst_margin=margin, detail=detail)


_MONITORS = {
    "criteria_satisfied": lambda ctx: _monitor_criteria(ctx, True),
    "criteria_unsatisfied": lambda ctx: _monitor_criteria(ctx, False),
    "blew_up": lambda ctx: _monitor_verdict(ctx, BLEW_UP),
    "survived": lambda ctx: _monitor_verdict(ctx, SURVIVED),
    "energy_drift_rel": _monitor_energy,
    "defect_past_tstar": _monitor_defect,
    "inf2_past_tstar": _monitor_inf2,
    "inf1_margin": _monitor_inf1,
    "growth_bound": _monitor_growth,
}


# ---------------------------------------------------------------------------
# orchestration

def run_scenario(s: Scenario, out_dir: str | None = None,
                 simulate: bool = True) -> RunReport:
    """Build the model, resolve data, evaluate criteria, integrate, apply
    the asserted monitors, optionally write outputs."""
    model = build_model(s)
    u0, u1, built = resolve_data(s, model)
    crit = _criteria.check_levine_conditions(model, u0, u1)
    traj = None
    verdict = None
    if simulate:
        cfg = RunConfig(**s.run)
        traj, verdict = run(model, u0, u1, cfg)
    ctx = {"scenario": s, "model": model, "criteria": crit, "traj": traj,
           "verdict": verdict, "params": s.check_params}
    results = {name: _MONITORS[name](ctx) for name in s.checks}
    report = RunReport(scenario_name=s.name, model_kind=model.kind,
                       criteria=crit, verdict=verdict,
                       monitor_results=results, built=built)
    if out_dir is not None:
        csv_path, report_path = write_outputs(report, traj, out_dir)
        report = dataclasses.replace(report, csv_path=csv_path,
                                     report_path=report_path)
    return report


def write_outputs(report: RunReport, traj: Trajectory | None,
                  out_dir: str) -> tuple[str, str]:
    """Write trajectory.csv and report.txt with deterministic formatting
    (17 significant digits, fixed column and key order)."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "trajectory.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        if traj is not None:
            for i in range(len(traj)):
                row = (traj.t[i], traj.psi[i], traj.dpsi[i], traj.ddpsi_eq[i],
                       traj.energy[i], traj.defect[i], traj.inf2_rhs[i])
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    report_path = os.path.join(out_dir, "report.txt")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"scenario = {report.scenario_name}\n")
        fh.write(f"model_kind = {report.model_kind}\n")
        crit = report.criteria
        for key in ("l1_value", "l2_lhs", "l2_rhs", "a0", "energy0",
                    "psi0", "dpsi0"):
            fh.write(f"criteria_{key} = {getattr(crit, key):.17g}\n")
        fh.write(f"criteria_satisfied = {_fmt(crit.satisfied)}\n")
        bound = crit.levine_time_bound
        fh.write("criteria_levine_time_bound = "
                 + ("none" if bound is None else f"{bound:.17g}") + "\n")
        if report.built is not None:
            b = report.built
            for key in ("c0", "c1", "K2", "achieved_energy"):
                fh.write(f"built_{key} = {getattr(b, key):.17g}\n")
            if b.notes:
                fh.write(f"built_notes = {b.notes}\n")
        if report.verdict is not None:
            v = report.verdict
            fh.write(f"verdict_status = {v.status}\n")
            fh.write("verdict_t_detect = "
                     + ("none" if v.t_detect is None else f"{v.t_detect:.17g}")
                     + "\n")
            fh.write(f"verdict_psi_final = {v.psi_final:.17g}\n")
            fh.write(f"verdict_reason = {v.reason}\n")
        for name, res in report.monitor_results.items():
            state = "skipped" if res.passed is None else \
                ("pass" if res.passed else "fail")
            fh.write(f"check_{name} = {state}\n")
            fh.write(f"check_{name}_margin = {res.worst_margin:.17g}\n")
            if res.detail:
                fh.write(f"check_{name}_detail = {res.detail}\n")
        fh.write(f"all_checks_passed = {_fmt(report.all_passed)}\n")
        fh.write("csv = trajectory.csv\n")
    return csv_path, report_path


def built_data_scenario(s: Scenario, built: BuiltData) -> Scenario:
    """Rewrite a builder scenario with the built vectors inlined, so the
    exact run can be replayed byte-identically."""
    data = {"u0": ("vec", tuple(float(x) for x in built.u0)),
            "u1": ("vec", tuple(float(x) for x in built.u1))}
    return dataclasses.replace(s, data=data)
