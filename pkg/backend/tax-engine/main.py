"""
ASSETAX command-line tool
Asset valuation, optimal tax and prize schedules, steady states and policy reports
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, TextIO

import numpy as np
import pandas as pd

from models.policy import AssetCategory, PolicyConfig
from services.report_service import (
    SWEEP_PARAMETERS,
    ReportService,
    emit,
    render,
    render_report,
    valuation_frame,
)
from services.scenario_service import Scenario, parse_scenario
from services.verification_service import VerificationService
from utils.exceptions import EXIT_NUMERICAL, EXIT_OK, AssetaxError, ScenarioError, UsageError
from utils.logger import setup_logger

# Initialize logger
logger = setup_logger(__name__)

REFERENCE_SCENARIO = Path(__file__).resolve().parent / "scenarios" / "reference.yaml"
FORMATS = ("csv", "json", "table")


class _Parser(argparse.ArgumentParser):
    """argparse reports bad arguments through UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> np.ndarray:
    """'start:stop:n' -> n evenly spaced points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like start:stop:n, got {text!r}")
    try:
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must look like start:stop:n, got {text!r}")
    if n < 1:
        raise UsageError(f"grid needs at least one point, got {n}")
    if n > 1 and not stop > start:
        raise UsageError(f"grid stop must exceed start, got {text!r}")
    return np.linspace(start, stop, n)


def _load(args) -> Scenario:
    if args.scenario is None:
        raise UsageError(f"{args.command} needs --scenario")
    return parse_scenario(args.scenario)


def _cmd_value(args, out: TextIO) -> int:
    fmt = args.format or "csv"
    if args.income is not None:
        defaults = PolicyConfig()
        frame = valuation_frame(
            args.income,
            defaults.land_tax_rate if args.tax_rate is None else args.tax_rate,
            defaults.discount_rate if args.discount is None else args.discount,
            args.periods or defaults.periods_per_year,
        )
    else:
        scenario = _load(args)
        config = scenario.policy
        rows = []
        for asset in sorted(scenario.assets, key=lambda a: a.asset_id):
            if asset.category is not AssetCategory.LAND_OR_USEFUL_PRIVILEGE:
                continue
            rent = asset.income_flow if asset.income_flow > 0 else asset.market_value * config.discount_rate
            row = valuation_frame(
                rent,
                config.land_tax_rate if args.tax_rate is None else args.tax_rate,
                config.discount_rate if args.discount is None else args.discount,
                args.periods or config.periods_per_year,
            )
            row.insert(0, "asset_id", asset.asset_id)
            rows.append(row)
        if not rows:
            raise UsageError("scenario has no land or useful-privilege assets to value; pass --income")
        frame = pd.concat(rows, ignore_index=True)
    emit(render(frame, fmt), args.out, f"value.{_suffix(fmt)}", out)
    return EXIT_OK


def _cmd_schedule(args, out: TextIO) -> int:
    grid = parse_grid(args.grid) if args.grid else None
    scenario = _load(args)
    name = args.name
    if name is None:
        if len(scenario.schedules) != 1:
            raise UsageError(f"choose a schedule with --name: {sorted(scenario.schedules)}")
        name = next(iter(scenario.schedules))
    fmt = args.format or "csv"
    frame = ReportService(scenario).schedule_frame(name, grid)
    emit(render(frame, fmt), args.out, f"schedule_{name}.{_suffix(fmt)}", out)
    return EXIT_OK


def _cmd_steady_state(args, out: TextIO) -> int:
    scenario = _load(args)
    fmt = args.format or "csv"
    frame = ReportService(scenario).steady_state_frame()
    emit(render(frame, fmt), args.out, f"steady_state.{_suffix(fmt)}", out)
    return EXIT_OK


def _cmd_report(args, out: TextIO) -> int:
    scenario = _load(args)
    fmt = args.format or "json"
    report = ReportService(scenario).revenue_report()
    emit(render_report(report, fmt), args.out, f"report.{_suffix(fmt)}", out)
    return EXIT_OK


def _cmd_sweep(args, out: TextIO) -> int:
    if not args.grid:
        raise UsageError("sweep needs --grid start:stop:n")
    values = parse_grid(args.grid)
    scenario = _load(args)
    fmt = args.format or "csv"
    frame = ReportService(scenario).sweep(args.param, list(values), workers=args.workers)
    emit(render(frame, fmt), args.out, f"sweep.{_suffix(fmt)}", out)
    return EXIT_OK


def _cmd_verify(args, out: TextIO) -> int:
    scenario = parse_scenario(args.scenario or REFERENCE_SCENARIO)
    report = VerificationService(scenario, seed=args.seed).run()
    fmt = args.format or "table"
    if fmt == "json":
        text = report.model_dump_json(indent=2) + "\n"
    else:
        lines = []
        for check in report.checks:
            mark = "PASS" if check.passed else "FAIL"
            line = f"[{mark}] {check.name}"
            if check.observed is not None:
                line += f": {check.observed}"
            if not check.passed and check.detail:
                line += f" ({check.detail})"
            lines.append(line)
        passed = sum(c.passed for c in report.checks)
        lines.append(f"{passed}/{len(report.checks)} checks passed")
        text = "\n".join(lines) + "\n"
    emit(text, args.out, f"verify.{_suffix(fmt)}", out)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def _suffix(fmt: str) -> str:
    return "txt" if fmt == "table" else fmt


COMMANDS = {
    "value": _cmd_value,
    "schedule": _cmd_schedule,
    "steady-state": _cmd_steady_state,
    "report": _cmd_report,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", help="Scenario file (YAML)")
    common.add_argument("--out", help="Directory for output files; stdout when omitted")
    common.add_argument("--format", choices=FORMATS, help="Output format")
    common.add_argument("--seed", type=int, help="Seed for randomized checks")

    parser = _Parser(prog="assetax", description="Optimal taxation of assets: values, schedules and policy reports")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_value = sub.add_parser("value", parents=[common], help="Asset values under a recurring value tax")
    p_value.add_argument("--income", type=float, help="Income flow per period")
    p_value.add_argument("--tax-rate", type=float, help="Value tax rate per period")
    p_value.add_argument("--discount", type=float, help="Discount rate per period")
    p_value.add_argument("--periods", type=int, help="Payment periods per year")

    p_sched = sub.add_parser("schedule", parents=[common], help="Tabulate a tax or prize schedule")
    p_sched.add_argument("--name", help="Schedule name in the scenario")
    p_sched.add_argument("--grid", help="start:stop:n")

    sub.add_parser("steady-state", parents=[common], help="Solve agent steady states")
    sub.add_parser("report", parents=[common], help="Apply the policy to every asset")

    p_sweep = sub.add_parser("sweep", parents=[common], help="Vary one policy parameter")
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p_sweep.add_argument("--grid", help="start:stop:n")
    p_sweep.add_argument("--workers", type=int, help="Concurrent sweep points")

    sub.add_parser("verify", parents=[common], help="Run the verification checklist")
    return parser


def run(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    """Parse arguments, dispatch a command and map failures to exit codes."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except ScenarioError as e:
        logger.error(f"❌ {e}")
        return e.exit_code
    except AssetaxError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
