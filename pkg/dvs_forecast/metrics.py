"""Forecast error measures: MAD, MAPE, SMAPE, RMSE and NRMSE.

Formulas follow their usual printed definitions literally: MAPE divides by
the signed actual, SMAPE by the signed sum `pred + actual`. Undefined
entries are reported as None with a flag instead of raising.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import LengthMismatchError, NonFiniteError

logger = logging.getLogger(__name__)

METRIC_NAMES = ("mad", "mape", "smape", "rmse", "nrmse")

MAPE_ZERO_ACTUAL = "mape_undefined_zero_actual"
MAPE_NEGATIVE_ACTUAL = "mape_negative_actual"
SMAPE_ZERO_DENOMINATOR = "smape_undefined_zero_denominator"
SMAPE_NEGATIVE_DENOMINATOR = "smape_negative_denominator"
NRMSE_ZERO_RANGE = "nrmse_undefined_zero_range"


@dataclass
class MetricReport:
    n: int
    mad: Optional[float]
    mape: Optional[float]
    smape: Optional[float]
    rmse: Optional[float]
    nrmse: Optional[float]
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"n": self.n}
        for name in METRIC_NAMES:
            value = getattr(self, name)
            data[name] = None if value is None else float(f"{value:.17g}")
        data["flags"] = list(self.flags)
        return data


def evaluate_metrics(
    preds: Sequence[float], actuals: Sequence[float], strict_smape: bool = False
) -> MetricReport:
    """All five error measures at once.

    With `strict_smape` the SMAPE denominator is |pred| + |actual| instead of
    the signed sum.
    """
    preds = np.asarray(preds, dtype=np.float64).ravel()
    actuals = np.asarray(actuals, dtype=np.float64).ravel()
    if len(preds) != len(actuals) or len(preds) == 0:
        raise LengthMismatchError(
            f"need equal non-zero lengths, got {len(preds)} predictions and {len(actuals)} actuals"
        )
    if not (np.all(np.isfinite(preds)) and np.all(np.isfinite(actuals))):
        raise NonFiniteError("predictions or actuals contain NaN or infinity")

    n = len(preds)
    flags = []
    abs_err = np.abs(preds - actuals)
    mad = float(abs_err.mean())
    rmse = float(np.sqrt(np.mean(abs_err**2)))

    if np.any(actuals == 0):
        mape = None
        flags.append(MAPE_ZERO_ACTUAL)
    else:
        mape = float(np.mean(abs_err / actuals))
        if np.any(actuals < 0):
            flags.append(MAPE_NEGATIVE_ACTUAL)

    denominator = np.abs(preds) + np.abs(actuals) if strict_smape else preds + actuals
    if np.any(denominator == 0):
        smape = None
        flags.append(SMAPE_ZERO_DENOMINATOR)
    else:
        smape = float(2.0 / n * np.sum(abs_err / denominator))
        if np.any(denominator < 0):
            flags.append(SMAPE_NEGATIVE_DENOMINATOR)

    spread = float(actuals.max() - actuals.min())
    if spread == 0:
        nrmse = None
        flags.append(NRMSE_ZERO_RANGE)
    else:
        nrmse = rmse / spread

    for flag in flags:
        logger.warning("metric flag: %s", flag)
    return MetricReport(n=n, mad=mad, mape=mape, smape=smape, rmse=rmse, nrmse=nrmse, flags=flags)


def median_report(reports: Sequence[MetricReport]) -> MetricReport:
    """Per-metric median over several runs (e.g. seeds); undefined entries are skipped."""
    if not reports:
        raise LengthMismatchError("no reports to combine")
    values = {}
    for name in METRIC_NAMES:
        defined = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        values[name] = float(np.median(defined)) if defined else None
    flags = sorted({flag for r in reports for flag in r.flags})
    return MetricReport(n=reports[0].n, flags=flags, **values)


def format_table(rows: Sequence[Tuple[str, MetricReport]]) -> str:
    """Aligned text table, one row per method."""
    header = ["method"] + [name.upper() for name in METRIC_NAMES]
    body = [
        [name]
        + ["undefined" if getattr(r, m) is None else f"{getattr(r, m):.6g}" for m in METRIC_NAMES]
        for name, r in rows
    ]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = []
    for row in [header] + body:
        cells = [cell.ljust(width) if i == 0 else cell.rjust(width) for i, (cell, width) in enumerate(zip(row, widths))]
        lines.append("  ".join(cells))
    return "\n".join(lines)
