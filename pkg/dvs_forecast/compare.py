"""Method registry and the shared train/test comparison harness."""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import (
    fit_linear,
    fit_ses_alpha,
    ses_forecast,
    sma_forecast,
    vg_randomwalk_forecast,
)
from .config import DataConfig, ExperimentConfig
from .errors import UnknownMethodError
from .metrics import MetricReport, evaluate_metrics, median_report
from .series import TimeSeries, WindowSet, make_windows, split_train_test
from .training import TrainConfig, build_stack, predict, train

logger = logging.getLogger(__name__)

# method name -> (architecture, use_dvs)
NEURAL_METHODS = {
    "dvs-cnn": ("dvs-cnn", True),
    "cnn": ("dvs-cnn", False),
    "dvs-ann": ("ann", True),
    "ann": ("ann", False),
    "dvs-cnn64": ("ablation-cnn", True),
    "cnn64": ("ablation-cnn", False),
}
# trained with the constant-rate ablation preset instead of the cyclic schedule
FIXED_RATE_METHODS = frozenset({"dvs-ann", "ann", "dvs-cnn64", "cnn64"})
BASELINE_METHODS = ("sma", "ses", "linear", "vg-walk")
METHODS = tuple(NEURAL_METHODS) + BASELINE_METHODS

OUT_OF_SCOPE = frozenset(
    {"arima", "sarima", "ets-ann", "arima-ann", "svm", "lasso", "bayesian", "logistic", "dtr", "lstm", "dvs-lstm"}
)


def resolve_methods(names: Sequence[str]) -> List[str]:
    for name in names:
        if name in OUT_OF_SCOPE:
            raise UnknownMethodError(f"unknown method: {name} (out of scope)")
        if name not in METHODS:
            raise UnknownMethodError(f"unknown method: {name} (expected one of {', '.join(METHODS)})")
    return list(dict.fromkeys(names))


def prepare_split(series: TimeSeries, data: DataConfig) -> Tuple[WindowSet, WindowSet]:
    windows = make_windows(series, data.window_len, drop_last=data.drop_last)
    return split_train_test(windows, data.train_fraction)


@dataclass
class MethodResult:
    method: str
    report: MetricReport
    predictions: np.ndarray
    per_seed: List[Tuple[int, MetricReport]] = field(default_factory=list)
    protocol: Optional[TrainConfig] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "metrics": self.report.to_dict(),
            "per_seed": [{"seed": seed, "metrics": r.to_dict()} for seed, r in self.per_seed],
            "train": None if self.protocol is None else self.protocol.to_dict(),
        }


def baseline_predictions(
    method: str, train_set: WindowSet, test_set: WindowSet, config: ExperimentConfig
) -> np.ndarray:
    settings = config.baselines
    if method == "sma":
        return np.array([sma_forecast(row, settings.sma_k) for row in test_set.inputs])
    if method == "ses":
        alpha = settings.ses_alpha
        if alpha is None:
            alpha = fit_ses_alpha(train_set)
            logger.info("fitted exponential smoothing alpha=%.2f", alpha)
        return np.array([ses_forecast(row, alpha) for row in test_set.inputs])
    if method == "linear":
        return fit_linear(train_set).predict(test_set.inputs)
    if method == "vg-walk":
        return np.array([vg_randomwalk_forecast(row, settings.random_walk) for row in test_set.inputs])
    raise UnknownMethodError(f"unknown method: {method}")


def method_train_config(method: str, config: TrainConfig, seed: int) -> TrainConfig:
    """The training protocol a neural method runs with.

    The DVS+CNN stack and its plain counterpart follow `config`; the ANN and
    64-filter CNN learners use the fixed-rate ablation preset.
    """
    architecture, use_dvs = NEURAL_METHODS[method]
    if method in FIXED_RATE_METHODS:
        return TrainConfig.ablation_preset(config, architecture=architecture, use_dvs=use_dvs, seed=seed)
    return replace(config, architecture=architecture, use_dvs=use_dvs, seed=seed)


def neural_predictions(
    method: str, train_set: WindowSet, test_set: WindowSet, config: ExperimentConfig, seed: int
) -> np.ndarray:
    cfg = method_train_config(method, config.train, seed)
    report = train(build_stack(cfg.architecture, train_set.window_len), train_set, cfg)
    return predict(report.model, test_set)


def run_method(
    method: str,
    train_set: WindowSet,
    test_set: WindowSet,
    config: ExperimentConfig,
    seeds: Sequence[int],
) -> MethodResult:
    """Evaluate one method on the test split; neural methods once per seed."""
    actuals = test_set.targets
    if method not in NEURAL_METHODS:
        preds = baseline_predictions(method, train_set, test_set, config)
        return MethodResult(method, evaluate_metrics(preds, actuals), preds)

    per_seed = []
    first = None
    for seed in seeds:
        preds = neural_predictions(method, train_set, test_set, config, seed)
        per_seed.append((seed, evaluate_metrics(preds, actuals)))
        if first is None:
            first = preds
        logger.info("%s seed %d: rmse=%.6g", method, seed, per_seed[-1][1].rmse)
    protocol = method_train_config(method, config.train, seeds[0])
    return MethodResult(method, median_report([r for _, r in per_seed]), first, per_seed, protocol)


def compare_methods(
    series: TimeSeries,
    config: ExperimentConfig,
    methods: Sequence[str],
    seeds: Sequence[int],
) -> Tuple[List[MethodResult], WindowSet]:
    """Run every method on one shared chronological split, in the given order."""
    methods = resolve_methods(methods)
    if not seeds:
        seeds = [config.train.seed]
    train_set, test_set = prepare_split(series, config.data)
    logger.info("comparing %s on %d train / %d test windows", ", ".join(methods), len(train_set), len(test_set))
    results = [run_method(m, train_set, test_set, config, seeds) for m in methods]
    return results, test_set


def predictions_csv(test_set: WindowSet, predictions: np.ndarray) -> str:
    lines = ["index,actual,predicted"]
    lines.extend(
        f"{int(index)},{actual:.17g},{pred:.17g}"
        for index, actual, pred in zip(test_set.target_indices(), test_set.targets, predictions)
    )
    return "\n".join(lines) + "\n"
