"""Command-line entry point: run, check, build-data and sweep subcommands.

Exit status is 0 iff every asserted monitor of every executed scenario
passed (build-data exits nonzero on a failed construction).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .data_builder import build_positive_energy_data, normalize_pair
from .scenario import (
    Scenario,
    ScenarioError,
    build_model,
    built_data_scenario,
    parse_scenario,
    resolve_data,
    run_scenario,
    serialize_scenario,
    write_outputs,
)

__all__ = ["main"]


def _print_report(report) -> None:
    print(f"scenario {report.scenario_name!r} [{report.model_kind}]")
    print(f"  criteria satisfied: {report.criteria.satisfied}")
    if report.built is not None:
        b = report.built
        print(f"  built data: c0={b.c0:.6g} c1={b.c1:.6g} "
              f"E={b.achieved_energy:.6g} (target {b.K2:.6g})")
    if report.verdict is not None:
        v = report.verdict
        t = "-" if v.t_detect is None else f"{v.t_detect:.6g}"
        print(f"  verdict: {v.status} (t_detect={t}, psi_final={v.psi_final:.6g})")
    for name, res in report.monitor_results.items():
        state = "skipped" if res.passed is None else \
            ("PASS" if res.passed else "FAIL")
        print(f"  check {name}: {state} (margin {res.worst_margin:.3g})")


def _cmd_run(args) -> int:
    scenario = parse_scenario(args.scenario)
    report = run_scenario(scenario, out_dir=args.out)
    _print_report(report)
    return 0 if report.all_passed else 1


def _cmd_check(args) -> int:
    scenario = parse_scenario(args.scenario)
    report = run_scenario(scenario, out_dir=args.out, simulate=False)
    _print_report(report)
    return 0 if report.all_passed else 1


def _cmd_build_data(args) -> int:
    scenario = parse_scenario(args.scenario)
    if "K2" not in scenario.data:
        raise ScenarioError("build-data needs a builder scenario "
                            "([data] with K2, seed0, seed1)")
    model = build_model(scenario)
    u0, u1, built = resolve_data(scenario, model)
    print(f"built data for K2 = {built.K2:g}: c0={built.c0:.12g} "
          f"c1={built.c1:.12g} achieved E={built.achieved_energy:.12g}")
    if built.notes:
        print(f"  note: {built.notes}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        replay = built_data_scenario(scenario, built)
        path = os.path.join(args.out, "built_data.cfg")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_scenario(replay))
        print(f"  replayable scenario written to {path}")
    return 0


def _cmd_sweep(args) -> int:
    scenario = parse_scenario(args.scenario)
    failures = 0
    for value in args.values:
        patched = _override(scenario, args.param, value)
        sub_out = None
        if args.out:
            sub_out = os.path.join(args.out, f"{args.param}_{value:g}")
        report = run_scenario(patched, out_dir=sub_out)
        print(f"--- {args.param} = {value:g} ---")
        _print_report(report)
        if not report.all_passed:
            failures += 1
    return 0 if failures == 0 else 1


def _override(s: Scenario, param: str, value: float) -> Scenario:
    for block_name in ("data", "run", "model"):
        block = getattr(s, block_name)
        if param in block:
            new_block = dict(block)
            new_block[param] = value
            return dataclasses.replace(s, **{block_name: new_block})
    raise ScenarioError(f"sweep parameter {param!r} not found in the scenario")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blowlab",
        description="Scenario runner for blow-up studies of P u_tt + A u = F(u)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="criteria + simulation + monitors")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="criteria only, no simulation")
    p_check.add_argument("scenario")
    p_check.add_argument("--out", default=None)
    p_check.set_defaults(func=_cmd_check)

    p_build = sub.add_parser("build-data",
                             help="run the positive-energy data builder only")
    p_build.add_argument("scenario")
    p_build.add_argument("--out", default=None)
    p_build.set_defaults(func=_cmd_build_data)

    p_sweep = sub.add_parser("sweep", help="re-run a scenario over parameter values")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True, nargs="+", type=float)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
