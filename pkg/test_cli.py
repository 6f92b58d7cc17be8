"""
Tests for the assetax command-line tool
"""

import io
import json

import numpy as np
import pandas as pd
import pytest

from main import REFERENCE_SCENARIO, parse_grid, run
from utils.exceptions import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, UsageError

REF = str(REFERENCE_SCENARIO)


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def frame(text):
    return pd.read_csv(io.StringIO(text), float_precision="round_trip")


class TestGrid:

    def test_parse(self):
        np.testing.assert_array_equal(parse_grid("0:1:3"), [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(parse_grid("2:2:1"), [2.0])

    @pytest.mark.parametrize("text", ["0:1", "a:b:c", "0:1:0", "1:0:5"])
    def test_invalid(self, text):
        with pytest.raises(UsageError):
            parse_grid(text)


class TestUsage:

    @pytest.mark.parametrize("argv", [
        [],
        ["bogus"],
        ["report"],
        ["value", "--income", "abc"],
        ["value", "--income", "1", "--format", "xml"],
        ["sweep", "--scenario", REF, "--param", "policy.unknown", "--grid", "0:1:2"],
        ["sweep", "--scenario", REF, "--param", "policy.land_tax_rate"],
        ["schedule", "--scenario", REF, "--name", "innovation", "--grid", "0:50:0"],
        ["schedule", "--scenario", REF],
        ["schedule", "--scenario", REF, "--name", "missing"],
    ])
    def test_usage_errors_exit_one(self, argv):
        assert invoke(*argv)[0] == EXIT_USAGE

    def test_unreadable_scenario_is_a_data_error(self, tmp_path):
        assert invoke("report", "--scenario", str(tmp_path / "missing.yaml"))[0] == EXIT_DATA

    def test_invalid_scenario_is_a_data_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("name: bad\nassets:\n  - {id: x, category: castle}\n", encoding="utf-8")
        code, out = invoke("report", "--scenario", str(path))
        assert code == EXIT_DATA
        assert out == ""


class TestValue:

    def test_direct_inputs(self):
        code, out = invoke("value", "--income", "110", "--tax-rate", "0.05", "--discount", "0.005")
        assert code == EXIT_OK
        row = frame(out).iloc[0]
        assert row["taxed_value"] == pytest.approx(2000.0)
        assert abs(row["captured_share"] - 10 / 11) <= 1e-12
        assert row["annual_tax_rate"] == 0.6

    def test_fifteen_percent(self):
        row = frame(invoke("value", "--income", "1", "--tax-rate", "0.15", "--discount", "0.005")[1]).iloc[0]
        assert abs(row["captured_share"] - 30 / 31) <= 1e-12
        assert row["annual_tax_rate"] == 1.8

    def test_scenario_land_assets(self):
        code, out = invoke("value", "--scenario", REF)
        assert code == EXIT_OK
        table = frame(out)
        assert list(table["asset_id"]) == ["land_001", "land_002"]
        assert table["taxed_value"].tolist() == pytest.approx([2000.0, 2000.0])


class TestSchedule:

    def test_table(self):
        code, out = invoke("schedule", "--scenario", REF, "--name", "mineral", "--grid", "0:100:11")
        assert code == EXIT_OK
        table = frame(out)
        assert list(table.columns) == ["x", "marginal", "total", "regime_flag"]
        assert len(table) == 11
        assert table["total"].is_monotonic_increasing
        assert (table["regime_flag"] == "ok").all()

    def test_regime_failure_exits_three(self, tmp_path):
        path = tmp_path / "concentrated.yaml"
        path.write_text(
            "name: concentrated\n"
            "distributions:\n  d: {kind: pareto, scale: 1.0, shape: 2.0}\n"
            "weights:\n  w: {distribution: d, family: step, threshold: 5.0, below: 0.0, above: 1.0}\n"
            "elasticities:\n  e: {values: [0.25]}\n"
            "schedules:\n  s: {kind: wage_tax, distribution: d, weights: w, elasticity: e,"
            " grid: {start: 0.0, stop: 10.0, points: 11}}\n",
            encoding="utf-8",
        )
        assert invoke("schedule", "--scenario", str(path))[0] == EXIT_NUMERICAL


class TestReports:

    def test_steady_state(self):
        code, out = invoke("steady-state", "--scenario", REF)
        assert code == EXIT_OK
        table = frame(out)
        assert list(table["agent"]) == ["inventor", "wage_earner"]
        assert (table["k"] > 0).all()

    def test_report_json(self):
        code, out = invoke("report", "--scenario", REF)
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["abolished"] == ["taxi_medallion"]
        assert data["totals"]["asset_count"] == 9

    def test_report_written_to_directory(self, tmp_path):
        code, out = invoke("report", "--scenario", REF, "--format", "csv", "--out", str(tmp_path))
        assert code == EXIT_OK
        assert out == ""
        table = frame((tmp_path / "report.csv").read_text(encoding="utf-8"))
        assert table["category"].iloc[-1] == "total"

    def test_sweep_capture_share(self):
        code, out = invoke("sweep", "--scenario", REF, "--param", "policy.land_tax_rate", "--grid", "0:0.15:4")
        assert code == EXIT_OK
        table = frame(out)
        for value, share in zip(table["value"], table["capture_share"]):
            assert share == pytest.approx(value / (value + 0.005), abs=1e-12)
        totals = table[table["category"] == "total"]
        assert totals["value"].tolist() == pytest.approx([0.0, 0.05, 0.1, 0.15])
        assert totals["recurring_tax"].is_monotonic_increasing

    def test_sweep_is_deterministic_across_workers(self):
        argv = ["sweep", "--scenario", REF, "--param", "policy.floor_multiplier", "--grid", "1:4:4"]
        serial = invoke(*argv, "--workers", "1")
        parallel = invoke(*argv, "--workers", "3")
        assert serial == parallel
        assert serial[0] == EXIT_OK


class TestVerify:

    def test_reference_checklist_passes(self):
        code, out = invoke("verify")
        assert code == EXIT_OK, out
        assert "[FAIL]" not in out
        assert out.strip().endswith("checks passed")

    def test_output_is_reproducible(self):
        first = invoke("verify", "--format", "json", "--seed", "7")
        second = invoke("verify", "--format", "json", "--seed", "7")
        assert first == second
        assert json.loads(first[1])["checks"]
