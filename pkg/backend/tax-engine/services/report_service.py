"""
Report Service for ASSETAX
Builds schedule tables, steady-state tables, policy reports and parameter sweeps,
and writes them as CSV, JSON or aligned text
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from models.agents import solve_steady_state
from models.policy import REVENUE_CHANNELS, PolicyConfig, revenue_report
from models.schedules import IntegratedSchedule, integrate_schedule
from models.valuation import (
    annualize,
    asset_value_by_quadrature,
    asset_value_rate,
    captured_share,
)
from schemas.responses import CategoryTotals, RevenueReport, SteadyStateRow
from services.scenario_service import Scenario
from utils.config import get_settings
from utils.exceptions import UsageError
from utils.logger import setup_logger

logger = setup_logger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
SWEEP_PARAMETERS = (
    "policy.land_tax_rate",
    "policy.discount_rate",
    "policy.floor_multiplier",
    "policy.assessor_award_rate",
    "policy.mineral_auction_share",
)


def valuation_frame(income: float, tax_rate: float, discount: float, periods_per_year: int = 12) -> pd.DataFrame:
    """One-row valuation summary for an asset with constant income."""
    value = asset_value_rate(income, tax_rate, discount)
    tax_flow = tax_rate * value
    return pd.DataFrame([{
        "income_flow": income,
        "tax_rate": tax_rate,
        "discount_rate": discount,
        "untaxed_value": income / discount,
        "taxed_value": value,
        "taxed_value_quadrature": asset_value_by_quadrature(income, tax_flow, discount),
        "tax_flow": tax_flow,
        "captured_share": captured_share(tax_rate, discount),
        "annual_tax_rate": annualize(tax_rate, periods_per_year),
    }])


def totals_frame(report: RevenueReport) -> pd.DataFrame:
    rows = []
    for category, totals in list(report.by_category.items()) + [("total", report.totals)]:
        rows.append(_totals_row(category, totals))
    return pd.DataFrame(rows, columns=_TOTALS_COLUMNS)


_TOTALS_COLUMNS = [
    "category", "asset_count", "recurring_tax", "prizes_paid", "assessor_awards",
    *REVENUE_CHANNELS, "net_recurring_revenue", "net_one_time_revenue",
]


def _totals_row(category: str, totals: CategoryTotals) -> Dict[str, Any]:
    row = {
        "category": category,
        "asset_count": totals.asset_count,
        "recurring_tax": totals.recurring_tax,
        "prizes_paid": totals.prizes_paid,
        "assessor_awards": totals.assessor_awards,
        "net_recurring_revenue": totals.net_recurring_revenue,
        "net_one_time_revenue": totals.net_one_time_revenue,
    }
    for channel in REVENUE_CHANNELS:
        row[channel] = totals.revenue_channels.get(channel, 0.0)
    return row


class ReportService:
    """
    Runs scenario-level computations. Integrated schedules are cached per
    (schedule, grid) since agents and tables share them.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.schedule_cache: Dict[Any, IntegratedSchedule] = {}

    def integrated(self, name: str, grid: Optional[Sequence[float]] = None) -> IntegratedSchedule:
        if name not in self.scenario.schedules:
            raise UsageError(f"unknown schedule {name!r}; scenario has {sorted(self.scenario.schedules)}")
        points = self.scenario.schedule_grid(name) if grid is None else np.asarray(grid, dtype=float)
        key = (name, points.tobytes())
        if key not in self.schedule_cache:
            logger.info(f"Integrating schedule {name} over {points.size} points")
            self.schedule_cache[key] = integrate_schedule(self.scenario.schedules[name], points)
        return self.schedule_cache[key]

    def schedule_frame(self, name: str, grid: Optional[Sequence[float]] = None) -> pd.DataFrame:
        return self.integrated(name, grid).to_frame()

    def steady_states(self) -> List[SteadyStateRow]:
        rows = []
        for agent in self.scenario.agents:
            schedule_name = self.scenario.agent_schedules[agent.name]
            ss = solve_steady_state(agent, self.integrated(schedule_name))
            rows.append(SteadyStateRow(
                agent=agent.name,
                schedule=schedule_name,
                c=ss.c,
                k=ss.k,
                s=ss.s,
                flow_utility=ss.flow_utility,
                pv_utility=ss.pv_utility,
                foc_residual=ss.foc_residual,
                boundary=ss.boundary,
                kink=ss.kink,
            ))
        return rows

    def steady_state_frame(self) -> pd.DataFrame:
        columns = list(SteadyStateRow.model_fields)
        return pd.DataFrame([row.model_dump() for row in self.steady_states()], columns=columns)

    def revenue_report(self, config: Optional[PolicyConfig] = None) -> RevenueReport:
        return revenue_report(self.scenario.policy_scenario(config))

    def _sweep_point(self, parameter: str, value: float) -> List[Dict[str, Any]]:
        config = replace(self.scenario.policy, **{parameter.split(".", 1)[1]: float(value)})
        report = self.revenue_report(config)
        share = captured_share(config.land_tax_rate, config.discount_rate)
        rows = []
        for category, totals in list(report.by_category.items()) + [("total", report.totals)]:
            row = {"parameter": parameter, "value": float(value)}
            row.update(_totals_row(category, totals))
            row["capture_share"] = share
            rows.append(row)
        return rows

    def sweep(self, parameter: str, values: Sequence[float], workers: Optional[int] = None) -> pd.DataFrame:
        """
        Re-run the policy report for each value of one policy parameter.
        Long form: one row per (value, category), gathered in input order.
        """
        if parameter not in SWEEP_PARAMETERS:
            raise UsageError(f"cannot sweep {parameter!r}; choose one of {list(SWEEP_PARAMETERS)}")
        workers = workers or get_settings().sweep_workers
        logger.info(f"Sweeping {parameter} over {len(values)} values with {workers} worker(s)")

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                batches = list(pool.map(lambda v: self._sweep_point(parameter, v), values))
        else:
            batches = [self._sweep_point(parameter, v) for v in values]

        columns = ["parameter", "value", *_TOTALS_COLUMNS, "capture_share"]
        return pd.DataFrame([row for batch in batches for row in batch], columns=columns)


def render(frame: pd.DataFrame, fmt: str) -> str:
    """Render a table as csv, json (records) or aligned text."""
    if fmt == "csv":
        return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    if fmt == "json":
        return json.dumps(frame.to_dict(orient="records"), indent=2, sort_keys=True, default=_json_default) + "\n"
    if fmt == "table":
        return frame.to_string(index=False) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


def render_report(report: RevenueReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    text = render(totals_frame(report), fmt)
    if fmt == "table" and report.abolished:
        text += f"\nAbolished: {', '.join(report.abolished)}\n"
    return text


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def emit(text: str, out_dir: Optional[str], filename: str, stream=None) -> Optional[Path]:
    """Write text under out_dir, or to the stream when no directory is given."""
    if out_dir is None:
        if stream is not None:
            stream.write(text)
        return None
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / filename
    target.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {target}")
    return target
