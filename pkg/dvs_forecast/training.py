"""MSE loss, Adam with a cyclic learning rate, and the seeded training loop."""

import json
import logging
import time
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .checks import check_bool, check_choice, check_int, check_real
from .errors import ConfigError, ModelFormatError, NonFiniteError, ShapeError, TooShortError
from .neuralnet import (
    ARCHITECTURES,
    LayerStack,
    backward,
    forward,
    init_params,
    stack_from_dict,
    stack_to_dict,
)
from .series import WindowSet
from .visibility import dvs_transform_windows

logger = logging.getLogger(__name__)

LR_SCHEDULES = ("clr", "constant")
ABLATION_LR = 0.01


@dataclass(frozen=True)
class TrainConfig:
    """Training protocol; defaults follow the DVS+CNN setup."""

    iterations: int = 100
    lr_max: float = 1e-4
    lr_min: float = 1e-12
    clr_cycle_len: int = 20
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 7
    use_dvs: bool = True
    architecture: str = "dvs-cnn"
    lr_schedule: str = "clr"
    shuffle: bool = False

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise ConfigError(problems)

    def validate(self) -> List[str]:
        problems: List[str] = []
        check_int(problems, "iterations", self.iterations, minimum=1)
        max_ok = check_real(problems, "lr_max", self.lr_max, low=0)
        min_ok = check_real(problems, "lr_min", self.lr_min, low=0)
        if max_ok and min_ok and self.lr_min > self.lr_max:
            problems.append(f"lr_min: {self.lr_min!r} exceeds lr_max {self.lr_max!r}")
        check_int(problems, "clr_cycle_len", self.clr_cycle_len, minimum=1)
        check_real(problems, "adam_beta1", self.adam_beta1, low=0, high=1)
        check_real(problems, "adam_beta2", self.adam_beta2, low=0, high=1)
        check_real(problems, "adam_eps", self.adam_eps, low=0)
        check_int(problems, "seed", self.seed)
        check_bool(problems, "use_dvs", self.use_dvs)
        check_choice(problems, "architecture", self.architecture, ARCHITECTURES)
        check_choice(problems, "lr_schedule", self.lr_schedule, LR_SCHEDULES)
        check_bool(problems, "shuffle", self.shuffle)
        return problems

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        problems = [f"{key}: unknown key" for key in sorted(set(data) - known)]
        try:
            config = cls(**{k: v for k, v in data.items() if k in known})
        except ConfigError as exc:
            problems.extend(exc.problems)
        if problems:
            raise ConfigError(problems)
        return config

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def ablation_preset(cls, base: Optional["TrainConfig"] = None, **overrides) -> "TrainConfig":
        """Constant learning rate of 0.01 without DVS; other fields come from
        `base` (100 iterations by default), then `overrides`."""
        settings = {} if base is None else base.to_dict()
        settings.update(lr_schedule="constant", lr_max=ABLATION_LR, lr_min=ABLATION_LR, use_dvs=False)
        settings.update(overrides)
        return cls(**settings)


@dataclass
class AdamState:
    """First and second moment accumulators plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def fresh(cls, n_params: int) -> "AdamState":
        return cls(m=np.zeros(n_params), v=np.zeros(n_params))


@dataclass(frozen=True)
class Standardizer:
    """z-score with statistics from the training windows only."""

    mean: float
    scale: float

    @classmethod
    def fit(cls, inputs: np.ndarray, targets: np.ndarray) -> "Standardizer":
        pooled = np.concatenate([np.ravel(inputs), np.ravel(targets)])
        std = float(pooled.std())
        return cls(mean=float(pooled.mean()), scale=std if std > 0 else 1.0)

    def transform(self, values):
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.scale

    def inverse(self, values):
        return np.asarray(values, dtype=np.float64) * self.scale + self.mean


@dataclass
class TrainedModel:
    """A trained stack with the preprocessing needed to use it."""

    stack: LayerStack
    standardizer: Standardizer
    use_dvs: bool
    architecture: str
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = stack_to_dict(self.stack, self.seed)
        data.update(
            architecture=self.architecture,
            use_dvs=self.use_dvs,
            standardizer={"mean": self.standardizer.mean, "scale": self.standardizer.scale},
        )
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON ({exc})") from exc
        try:
            standardizer = data["standardizer"]
            model = cls(
                stack=stack_from_dict(data),
                standardizer=Standardizer(mean=float(standardizer["mean"]), scale=float(standardizer["scale"])),
                use_dvs=bool(data["use_dvs"]),
                architecture=data["architecture"],
                seed=data.get("seed"),
            )
        except KeyError as exc:
            raise ModelFormatError(f"missing field {exc}") from exc
        except (TypeError, ValueError, AttributeError) as exc:
            raise ModelFormatError(str(exc)) from exc
        if not isinstance(model.architecture, str) or model.architecture not in ARCHITECTURES:
            raise ModelFormatError(f"unknown architecture {model.architecture!r}")
        return model


@dataclass
class TrainReport:
    losses: List[float]
    model: TrainedModel
    config: TrainConfig
    wall_time_seconds: float = 0.0

    def to_dict(self, model_path: Optional[str] = None) -> Dict[str, Any]:
        return {
            "losses": list(self.losses),
            "config": self.config.to_dict(),
            "wall_time_seconds": self.wall_time_seconds,
            "model_path": model_path,
        }


def mse_loss(pred: float, target: float) -> Tuple[float, float]:
    diff = pred - target
    return diff * diff, 2.0 * diff


def clr_lr(iteration: int, cfg: TrainConfig) -> float:
    """Triangular cyclic learning rate: lr_min at cycle start, lr_max mid-cycle."""
    if cfg.lr_schedule == "constant":
        return cfg.lr_max
    position = (iteration % cfg.clr_cycle_len) / cfg.clr_cycle_len
    return cfg.lr_min + (cfg.lr_max - cfg.lr_min) * (1.0 - abs(2.0 * position - 1.0))


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    lr: float,
    cfg: TrainConfig,
) -> Tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam update, applied in place."""
    if params.shape != grads.shape or state.m.shape != params.shape:
        raise ShapeError("parameters, gradients and Adam state differ in length")
    if not np.all(np.isfinite(grads)):
        raise NonFiniteError("non-finite gradient")
    state.t += 1
    beta1, beta2 = cfg.adam_beta1, cfg.adam_beta2
    state.m *= beta1
    state.m += (1.0 - beta1) * grads
    state.v *= beta2
    state.v += (1.0 - beta2) * grads * grads
    m_hat = state.m / (1.0 - beta1**state.t)
    v_hat = state.v / (1.0 - beta2**state.t)
    params -= lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    if not np.all(np.isfinite(params)):
        raise NonFiniteError("parameters overflowed during the Adam update")
    return params, state


def network_inputs(inputs: np.ndarray, standardizer: Standardizer, use_dvs: bool) -> np.ndarray:
    """Standardize raw windows and optionally apply the DVS transform row-wise.

    Each zip entry is a mean of window values, so standardizing first gives
    the same result as transforming first.
    """
    scaled = standardizer.transform(inputs)
    if use_dvs:
        scaled = dvs_transform_windows(scaled)
    return scaled


def train(stack: LayerStack, train_set: WindowSet, cfg: TrainConfig) -> TrainReport:
    """Fit `stack` in place with per-window Adam updates.

    One iteration is a full pass over the training windows; parameter
    initialization and (optional) shuffling draw from `cfg.seed`.
    """
    if len(train_set) == 0:
        raise TooShortError("training set is empty")
    if train_set.window_len != stack.input_len:
        raise ShapeError(
            f"windows of length {train_set.window_len} do not fit a stack expecting {stack.input_len}"
        )
    started = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    init_params(stack, rng)
    standardizer = Standardizer.fit(train_set.inputs, train_set.targets)
    x = network_inputs(train_set.inputs, standardizer, cfg.use_dvs)
    y = standardizer.transform(train_set.targets)
    state = AdamState.fresh(stack.n_params)
    order = np.arange(len(y))

    losses = []
    for iteration in range(cfg.iterations):
        lr = clr_lr(iteration, cfg)
        if cfg.shuffle:
            order = rng.permutation(len(y))
        total = 0.0
        for k in order:
            pred, tape = forward(stack, x[k])
            loss, d_pred = mse_loss(pred, y[k])
            adam_step(stack.params, backward(stack, tape, d_pred), state, lr, cfg)
            total += loss
        losses.append(total / len(y))
        logger.debug("iteration %d: lr=%.3g mean loss=%.6g", iteration, lr, losses[-1])

    elapsed = time.perf_counter() - started
    logger.info(
        "trained %s (dvs=%s) for %d iterations in %.1fs, final loss %.6g",
        cfg.architecture,
        cfg.use_dvs,
        cfg.iterations,
        elapsed,
        losses[-1],
    )
    model = TrainedModel(
        stack=stack,
        standardizer=standardizer,
        use_dvs=cfg.use_dvs,
        architecture=cfg.architecture,
        seed=cfg.seed,
    )
    return TrainReport(losses=losses, model=model, config=cfg, wall_time_seconds=elapsed)


def predict(
    model: TrainedModel, windows: WindowSet, use_dvs: Optional[bool] = None
) -> np.ndarray:
    """One de-standardized prediction per window, in window order."""
    if len(windows) == 0:
        return np.empty(0)
    if windows.window_len != model.stack.input_len:
        raise ShapeError(
            f"windows of length {windows.window_len} do not fit a model expecting {model.stack.input_len}"
        )
    use_dvs = model.use_dvs if use_dvs is None else use_dvs
    x = network_inputs(windows.inputs, model.standardizer, use_dvs)
    preds = np.array([forward(model.stack, row)[0] for row in x])
    return model.standardizer.inverse(preds)


def build_stack(architecture: str, input_len: int) -> LayerStack:
    try:
        builder = ARCHITECTURES[architecture]
    except KeyError:
        raise ConfigError([f"architecture: unknown {architecture!r}"]) from None
    return builder(input_len)
