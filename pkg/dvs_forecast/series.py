"""Time series representation, CSV ingestion, windowing and synthetic data."""

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .csv_grammar import parse_series_rows
from .errors import (
    ConfigError,
    DegenerateSplitError,
    NonFiniteError,
    OrderError,
    TooShortError,
)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


def format_real(value: float) -> str:
    """Render a float with 17 significant digits (integers stay integral)."""
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return f"{value:.17g}"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered `(time, value)` points with strictly increasing times."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _readonly(self.times)
        values = _readonly(self.values)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-D and of equal length")
        if len(values) < 2:
            raise TooShortError(f"a series needs at least 2 points, got {len(values)}")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(times))):
            raise NonFiniteError("series contains non-finite times or values")
        steps = np.diff(times)
        if np.any(steps <= 0):
            bad = int(np.flatnonzero(steps <= 0)[0]) + 1
            raise OrderError(f"time {times[bad]!r} does not increase on {times[bad - 1]!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "TimeSeries":
        values = np.asarray(values, dtype=np.float64)
        return cls(times=np.arange(len(values), dtype=np.float64), values=values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class WindowSet:
    """Sliding windows of `window_len` inputs, each followed by one target.

    `start` is the source index of the first window's first element, so
    window k predicts source index `start + k + window_len`.
    """

    inputs: np.ndarray
    targets: np.ndarray
    window_len: int
    source_len: int
    start: int = 0

    def __post_init__(self):
        inputs = _readonly(self.inputs).reshape(-1, self.window_len)
        targets = _readonly(self.targets).reshape(-1)
        if len(inputs) != len(targets):
            raise ValueError("inputs and targets must have the same count")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return len(self.targets)

    def target_indices(self) -> np.ndarray:
        return self.start + self.window_len + np.arange(len(self))

    def subset(self, begin: int, end: int) -> "WindowSet":
        return WindowSet(
            inputs=self.inputs[begin:end],
            targets=self.targets[begin:end],
            window_len=self.window_len,
            source_len=self.source_len,
            start=self.start + begin,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "window_len": self.window_len,
                "windows": [
                    {"input": row.tolist(), "target": float(target)}
                    for row, target in zip(self.inputs, self.targets)
                ],
            }
        )


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a trend + seasonal + gaussian-noise series."""

    length: int = 295
    trend_slope: float = 20.0
    seasonal_amplitude: float = 150.0
    seasonal_period: float = 12.0
    noise_sigma: float = 30.0
    base_level: float = 4700.0
    seed: int = 7

    def validate(self, window_len: Optional[int] = None) -> List[str]:
        problems = []
        if self.length < 2:
            problems.append(f"length: must be >= 2, got {self.length}")
        if window_len is not None and self.length < window_len + 2:
            problems.append(
                f"length: must be >= window_len + 2 = {window_len + 2}, got {self.length}"
            )
        if not self.seasonal_period > 0:
            problems.append(
                f"seasonal_period: must be positive, got {self.seasonal_period}"
            )
        if not self.noise_sigma >= 0:
            problems.append(f"noise_sigma: must be non-negative, got {self.noise_sigma}")
        for name in ("trend_slope", "seasonal_amplitude", "base_level"):
            if not math.isfinite(getattr(self, name)):
                problems.append(f"{name}: must be finite")
        return problems


def load_series(csv_text: str) -> TimeSeries:
    """Parse `t,value` CSV text into a validated series."""
    rows = parse_series_rows(csv_text)
    if len(rows) < 2:
        raise TooShortError(f"a series needs at least 2 rows, got {len(rows)}")
    for (_, previous, _), (line, time, _) in zip(rows, rows[1:]):
        if time <= previous:
            raise OrderError(
                f"time {time!r} does not increase on previous {previous!r}", line=line
            )
    for line, time, value in rows:
        if not (math.isfinite(time) and math.isfinite(value)):
            raise NonFiniteError(f"line {line}: value out of floating-point range")
    return TimeSeries(
        times=np.array([time for _, time, _ in rows]),
        values=np.array([value for _, _, value in rows]),
    )


def write_series_csv(series: TimeSeries) -> str:
    lines = ["t,value"]
    lines.extend(
        f"{format_real(t)},{format_real(v)}" for t, v in zip(series.times, series.values)
    )
    return "\n".join(lines) + "\n"


def make_windows(series: TimeSeries, w: int, drop_last: bool = False) -> WindowSet:
    """Slide a window of `w` inputs plus one target over the series.

    Yields n - w windows, or n - w - 1 with `drop_last`.
    """
    if w < 1:
        raise ValueError(f"window length must be positive, got {w}")
    values = series.values
    n = len(values)
    needed = w + 2 if drop_last else w + 1
    if n < needed:
        raise TooShortError(f"series of length {n} is too short for window {w}")
    count = n - w - (1 if drop_last else 0)
    inputs = np.lib.stride_tricks.sliding_window_view(values, w)[:count]
    targets = values[w : w + count]
    return WindowSet(inputs=inputs, targets=targets, window_len=w, source_len=n)


def split_train_test(
    ws: WindowSet, train_fraction: float
) -> Tuple[WindowSet, WindowSet]:
    """Chronological split: the first floor(count * fraction) windows train."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    count = len(ws)
    cut = math.floor(count * train_fraction + 1e-9)
    if cut < 1 or cut >= count:
        raise DegenerateSplitError(
            f"{count} windows at fraction {train_fraction} leave an empty side"
        )
    return ws.subset(0, cut), ws.subset(cut, count)


def synth_series(spec: SynthSpec) -> TimeSeries:
    """Trend + sinusoidal season + seeded gaussian noise."""
    problems = spec.validate()
    if problems:
        raise ConfigError(problems)
    index = np.arange(spec.length, dtype=np.float64)
    values = (
        spec.base_level
        + spec.trend_slope * index
        + spec.seasonal_amplitude * np.sin(2.0 * np.pi * index / spec.seasonal_period)
    )
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        values = values + rng.normal(0.0, spec.noise_sigma, spec.length)
    return TimeSeries(times=index, values=values)
