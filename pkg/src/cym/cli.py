"""Command-line front end.

`cym verify` resolves a scenario (built-in name or JSON file), runs one named
residual suite or all applicable ones, prints a PASS/FAIL line per suite, and
optionally writes the deterministic JSON report and the per-point CSV.

Exit status: 0 when every selected check passes, 1 when any check fails,
2 on input errors (unknown scenario or suite, malformed scenario file,
unwritable output path).
"""
from __future__ import annotations

import argparse
import sys

from .forms import SamplePlan
from .harness import (SCENARIO_NAMES, ScenarioError, builtin_scenario,
                      load_scenario, run_suite, suite_names)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cym",
        description="Residual verification for gauge theory on trivialized "
                    "group bundles.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser(
        "verify", help="run residual suites against a scenario")
    verify.add_argument(
        "--scenario", required=True, metavar="NAME|PATH",
        help="built-in scenario name (%s) or path to a scenario JSON file"
             % ", ".join(SCENARIO_NAMES))
    verify.add_argument(
        "--suite", default="all", metavar="NAME",
        help="suite to run: one of %s, or 'all' for every suite applicable "
             "to the scenario (default)" % ", ".join(suite_names()))
    verify.add_argument("--points", type=int, default=None,
                        help="override the number of sample points")
    verify.add_argument("--seed", type=int, default=None,
                        help="override the sampling seed")
    verify.add_argument("--h", type=float, default=None,
                        help="step for first-derivative stencils")
    verify.add_argument("--h2", type=float, default=None,
                        help="step for nested/second-derivative stencils")
    verify.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply every tolerance by this factor")
    verify.add_argument("--report", default=None, metavar="OUT.json",
                        help="write the full JSON report here")
    verify.add_argument("--csv", default=None, metavar="OUT.csv",
                        help="write per-point residual rows here")
    return parser


def _resolve_scenario(token: str):
    if token in SCENARIO_NAMES:
        return builtin_scenario(token)
    return load_scenario(token)


def _cmd_verify(args) -> int:
    bundle = _resolve_scenario(args.scenario)
    plan = bundle.plan
    if args.points is not None or args.seed is not None:
        plan = SamplePlan(
            mode=plan.mode,
            count=args.points if args.points is not None else plan.count,
            seed=args.seed if args.seed is not None else plan.seed,
            tangent_probes=plan.tangent_probes)
    if plan.count < 1:
        raise ScenarioError("--points: need at least one sample point")

    report = run_suite(bundle, args.suite, plan=plan, h=args.h, h2=args.h2,
                       tol_scale=args.tol_scale)

    for suite in report.suites:
        binding = suite._binding()
        status = "PASS" if suite.passed else "FAIL"
        print(f"[{status}] {suite.name}: residual {binding.residual:.3e} "
              f"(tolerance {binding.tolerance:.1e})")
        if not suite.passed:
            for check in suite.checks:
                if not check.passed:
                    print(f"       {check.check}: {check.residual:.3e} "
                          f"> {check.tolerance:.1e}")

    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    if args.csv:
        report.write_csv(args.csv)

    verdict = "all checks passed" if report.passed else "checks FAILED"
    print(f"{report.scenario}: {verdict}")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _cmd_verify(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
