"""Tests for forecast error measures."""

import math
import unittest

import numpy as np

from dvs_forecast.errors import LengthMismatchError, NonFiniteError
from dvs_forecast.metrics import (
    MAPE_NEGATIVE_ACTUAL,
    MAPE_ZERO_ACTUAL,
    NRMSE_ZERO_RANGE,
    SMAPE_NEGATIVE_DENOMINATOR,
    SMAPE_ZERO_DENOMINATOR,
    MetricReport,
    evaluate_metrics,
    format_table,
    median_report,
)


def element_by_element(preds, actuals):
    n = len(preds)
    mad = sum(abs(p - a) for p, a in zip(preds, actuals)) / n
    mape = sum(abs(p - a) / a for p, a in zip(preds, actuals)) / n
    smape = 2.0 / n * sum(abs(p - a) / (p + a) for p, a in zip(preds, actuals))
    rmse = math.sqrt(sum((p - a) ** 2 for p, a in zip(preds, actuals)) / n)
    return {"mad": mad, "mape": mape, "smape": smape, "rmse": rmse, "nrmse": rmse / (max(actuals) - min(actuals))}


class TestEvaluateMetrics(unittest.TestCase):
    """Test cases for evaluate_metrics."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(8)

    def test_perfect_forecast(self):
        """Test that exact predictions score zero everywhere."""
        report = evaluate_metrics([4, 7], [4, 7])
        self.assertEqual((report.mad, report.mape, report.smape, report.rmse, report.nrmse), (0, 0, 0, 0, 0))
        self.assertEqual(report.flags, [])

    def test_hand_example(self):
        """Test every measure on a two-point example."""
        report = evaluate_metrics([2, 3], [1, 3])
        self.assertAlmostEqual(report.mad, 0.5)
        self.assertAlmostEqual(report.mape, 0.5)
        self.assertAlmostEqual(report.smape, 1 / 3)
        self.assertAlmostEqual(report.rmse, 0.70711, places=5)
        self.assertAlmostEqual(report.nrmse, 0.35355, places=5)

    def test_matches_independent_recomputation(self):
        """Test 100 random pairs against a loop over the printed formulas."""
        for _ in range(100):
            n = int(self.rng.integers(2, 30))
            actuals = self.rng.uniform(50, 150, size=n)
            preds = actuals + self.rng.normal(0, 10, size=n)
            report = evaluate_metrics(preds, actuals)
            for name, expected in element_by_element(preds.tolist(), actuals.tolist()).items():
                self.assertLessEqual(abs(getattr(report, name) - expected), 1e-9 * abs(expected), name)

    def test_scale_and_permutation(self):
        """Test scaling and joint permutation properties."""
        actuals = self.rng.uniform(1, 10, size=20)
        preds = actuals * self.rng.uniform(0.8, 1.2, size=20)
        base = evaluate_metrics(preds, actuals)
        scaled = evaluate_metrics(3.0 * preds, 3.0 * actuals)
        self.assertAlmostEqual(scaled.mad, 3.0 * base.mad, places=10)
        self.assertAlmostEqual(scaled.rmse, 3.0 * base.rmse, places=10)
        for name in ("mape", "smape", "nrmse"):
            self.assertAlmostEqual(getattr(scaled, name), getattr(base, name), places=12)
        order = self.rng.permutation(20)
        permuted = evaluate_metrics(preds[order], actuals[order])
        for name in ("mad", "mape", "smape", "rmse", "nrmse"):
            self.assertAlmostEqual(getattr(permuted, name), getattr(base, name), places=12)
        self.assertGreaterEqual(base.rmse, base.mad)

    def test_zero_range_flagged(self):
        """Test that NRMSE is undefined for flat actuals."""
        report = evaluate_metrics([4, 6], [5, 5])
        self.assertIsNone(report.nrmse)
        self.assertEqual(report.flags, [NRMSE_ZERO_RANGE])
        self.assertEqual(report.mad, 1.0)

    def test_division_hazards_flagged(self):
        """Test zero and negative denominators."""
        report = evaluate_metrics([1, -1], [0, 1])
        self.assertIsNone(report.mape)
        self.assertIsNone(report.smape)
        self.assertIn(MAPE_ZERO_ACTUAL, report.flags)
        self.assertIn(SMAPE_ZERO_DENOMINATOR, report.flags)

        report = evaluate_metrics([-3, 2], [-1, 2])
        self.assertIn(MAPE_NEGATIVE_ACTUAL, report.flags)
        self.assertIn(SMAPE_NEGATIVE_DENOMINATOR, report.flags)
        self.assertLess(report.smape, 0)

    def test_strict_smape(self):
        """Test the absolute-value denominator variant."""
        report = evaluate_metrics([-3, 2], [-1, 2], strict_smape=True)
        self.assertAlmostEqual(report.smape, 2.0 / 2 * (2 / 4))
        self.assertNotIn(SMAPE_NEGATIVE_DENOMINATOR, report.flags)

    def test_flags_are_logged(self):
        """Test that undefined measures are logged as warnings."""
        with self.assertLogs("dvs_forecast.metrics", level="WARNING") as logs:
            evaluate_metrics([4, 6], [5, 5])
        self.assertIn(NRMSE_ZERO_RANGE, logs.output[0])

    def test_invalid_input(self):
        """Test length and finiteness checks."""
        with self.assertRaises(LengthMismatchError):
            evaluate_metrics([1, 2], [1])
        with self.assertRaises(LengthMismatchError):
            evaluate_metrics([], [])
        with self.assertRaises(NonFiniteError):
            evaluate_metrics([1, float("inf")], [1, 2])


class TestReports(unittest.TestCase):
    """Test cases for combining and rendering reports."""

    def test_median_report(self):
        """Test the per-metric median with undefined entries skipped."""
        reports = [
            MetricReport(n=5, mad=1.0, mape=0.1, smape=0.1, rmse=2.0, nrmse=None, flags=[NRMSE_ZERO_RANGE]),
            MetricReport(n=5, mad=3.0, mape=0.3, smape=0.3, rmse=4.0, nrmse=0.5),
            MetricReport(n=5, mad=2.0, mape=0.2, smape=0.2, rmse=9.0, nrmse=0.7),
        ]
        combined = median_report(reports)
        self.assertEqual((combined.mad, combined.rmse), (2.0, 4.0))
        self.assertAlmostEqual(combined.nrmse, 0.6)
        self.assertEqual(combined.flags, [NRMSE_ZERO_RANGE])

    def test_to_dict_uses_null(self):
        """Test that undefined measures serialize as None."""
        data = evaluate_metrics([4, 6], [5, 5]).to_dict()
        self.assertIsNone(data["nrmse"])
        self.assertEqual(data["n"], 2)

    def test_format_table(self):
        """Test the aligned text table."""
        table = format_table([("sma", evaluate_metrics([4, 6], [5, 5]))])
        header, row = table.splitlines()
        self.assertTrue(header.startswith("method"))
        self.assertIn("NRMSE", header)
        self.assertIn("undefined", row)
        self.assertEqual(len(header), len(row))


if __name__ == "__main__":
    unittest.main()
