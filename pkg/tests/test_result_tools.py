import json

import numpy as np
import pytest

from tools.errors import InsufficientPoints
from tools.result_tools import (print_experiment_report, rate_slope,
                                summarize_errors, write_manifest)
from tools.simulation_tools import ExperimentReport


def records_for(medians):
    return [
        {"n": n, "rep": rep, "error": m * factor, "failed": False}
        for n, m in medians.items()
        for rep, factor in enumerate((0.5, 1.0, 1.5))
    ]


class TestSummary:
    def test_quartiles_and_failures(self):
        records = records_for({10: 2.0}) + [{"n": 10, "rep": 3, "error": None, "failed": True}]
        stats = summarize_errors(records)["per_n"]["10"]
        assert stats["count"] == 3
        assert stats["failed"] == 1
        assert stats["median"] == 2.0
        assert stats["q1"] == 1.5
        assert stats["max"] == 3.0

    def test_monotonicity_flag(self):
        assert summarize_errors(records_for({10: 2.0, 100: 1.0}))["median_strictly_decreasing"]
        assert not summarize_errors(records_for({10: 2.0, 100: 2.0}))["median_strictly_decreasing"]
        failed_only = [{"n": 100, "rep": 0, "error": None, "failed": True}]
        assert not summarize_errors(records_for({10: 2.0}) + failed_only)["median_strictly_decreasing"]


class TestRateSlope:
    def test_exact_power_law(self):
        summary = summarize_errors(records_for({n: 3.0 * n ** -0.5 for n in (100, 1000, 10000)}))
        assert rate_slope(summary) == pytest.approx(-0.5)

    def test_needs_three_points(self):
        with pytest.raises(InsufficientPoints):
            rate_slope(summarize_errors(records_for({100: 1.0, 1000: 0.5})))

    def test_accepts_report(self):
        records = records_for({n: float(n) ** -1.0 for n in (10, 100, 1000)})
        report = ExperimentReport({}, records, summarize_errors(records))
        assert rate_slope(report) == pytest.approx(-1.0)


class TestOutputs:
    def test_manifest(self, tmp_path):
        (tmp_path / "a.csv").write_text("x\n", encoding="utf-8")
        path = write_manifest(tmp_path, [tmp_path / "a.csv"], {"seed": 1}, "estimate")
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
        assert manifest["files"] == ["a.csv"]
        assert manifest["command"] == "estimate"
        assert manifest["resolved_config"] == {"seed": 1}
        assert "version" in manifest

    def test_print_report(self, capsys):
        records = records_for({10: 2.0, 100: 1.0, 1000: 0.5})
        config = {"law": {"family": "two_point", "p": 0.3}, "innovation": {"name": "laplace"}, "reps": 3, "seed": 0}
        print_experiment_report(ExperimentReport(config, records, summarize_errors(records)))
        out = capsys.readouterr().out
        assert "Experiment Error Report" in out
        assert "Log-log rate slope: -0.301" in out
