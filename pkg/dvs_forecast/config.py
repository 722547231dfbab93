"""Experiment configuration loaded from JSON.

Schema (every key optional, unknown keys rejected)::

    {
      "data": {"window_len": 30, "train_fraction": 0.8, "drop_last": false},
      "train": {... TrainConfig fields ...},
      "baselines": {
        "sma_k": 1,
        "ses_alpha": null,
        "random_walk": {... RandomWalkConfig fields ...}
      }
    }
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

from .baselines import RandomWalkConfig
from .checks import check_bool, check_int, check_real
from .errors import ConfigError
from .training import TrainConfig


@dataclass(frozen=True)
class DataConfig:
    window_len: int = 30
    train_fraction: float = 0.8
    drop_last: bool = False

    def validate(self) -> List[str]:
        problems: List[str] = []
        check_int(problems, "window_len", self.window_len, minimum=1)
        check_real(problems, "train_fraction", self.train_fraction, low=0, high=1)
        check_bool(problems, "drop_last", self.drop_last)
        return problems


@dataclass(frozen=True)
class BaselineConfig:
    sma_k: int = 1
    ses_alpha: Optional[float] = None
    random_walk: RandomWalkConfig = field(default_factory=RandomWalkConfig)

    def validate(self) -> List[str]:
        problems: List[str] = []
        check_int(problems, "sma_k", self.sma_k, minimum=1)
        if self.ses_alpha is not None:
            check_real(problems, "ses_alpha", self.ses_alpha, low=0, high=1, high_inclusive=True)
        return problems


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        problems: List[str] = []
        if not isinstance(data, dict):
            raise ConfigError(["top level: expected a JSON object"])
        problems.extend(f"{key}: unknown section" for key in sorted(set(data) - {"data", "train", "baselines"}))

        baseline_data = data.get("baselines", {})
        random_walk = None
        if isinstance(baseline_data, dict):
            baseline_data = dict(baseline_data)
            random_walk = _section(
                RandomWalkConfig, baseline_data.pop("random_walk", {}), "baselines.random_walk", problems
            )
        config = cls(
            data=_section(DataConfig, data.get("data", {}), "data", problems),
            train=_section(TrainConfig, data.get("train", {}), "train", problems),
            baselines=_section(BaselineConfig, baseline_data, "baselines", problems),
        )
        if problems:
            raise ConfigError(problems)
        if random_walk is not None:
            config = replace(config, baselines=replace(config.baselines, random_walk=random_walk))
        return config

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, train=replace(self.train, seed=seed))

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _section(cls, data: Any, prefix: str, problems: List[str]):
    """Build one config dataclass, appending every problem under `prefix`."""
    if not isinstance(data, dict):
        problems.append(f"{prefix}: expected a JSON object")
        return cls()
    known = {f.name for f in fields(cls)}
    problems.extend(f"{prefix}.{key}: unknown key" for key in sorted(set(data) - known))
    try:
        section = cls(**{k: v for k, v in data.items() if k in known})
        found = section.validate()
    except ConfigError as exc:
        found = exc.problems
    problems.extend(f"{prefix}.{problem}" for problem in found)
    return None if found else section


def load_config(text: Optional[str]) -> ExperimentConfig:
    """Parse config JSON text; None gives the defaults."""
    if text is None:
        return ExperimentConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    return ExperimentConfig.from_dict(data)
