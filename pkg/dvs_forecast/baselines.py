"""Reference forecasters: moving average, exponential smoothing, window OLS
and a visibility-graph random-walk forecaster."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .checks import check_choice, check_int, check_real
from .errors import (
    DegenerateWalkError,
    KTooLargeError,
    LengthError,
    SingularSystemError,
    TooShortError,
)
from .series import WindowSet
from .visibility import AdjacencyMatrix, node_degrees, visibility_adjacency

logger = logging.getLogger(__name__)

RIDGE_LAMBDA = 1e-8
SES_ALPHA_GRID = np.round(np.arange(1, 100) / 100.0, 2)
WEIGHTINGS = ("similarity", "distance")


def sma_forecast(window: Sequence[float], k: int) -> float:
    """Mean of the last `k` values."""
    window = np.asarray(window, dtype=np.float64)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(window):
        raise KTooLargeError(f"k={k} exceeds window length {len(window)}")
    if k == 1:
        return float(window[-1])
    return float(window[-k:].mean())


def _ses_levels(windows: np.ndarray, alpha: float) -> np.ndarray:
    level = windows[:, 0].copy()
    for column in range(1, windows.shape[1]):
        level = alpha * windows[:, column] + (1.0 - alpha) * level
    return level


def ses_forecast(window: Sequence[float], alpha: float) -> float:
    """Final level of simple exponential smoothing started at the first value."""
    window = np.asarray(window, dtype=np.float64)
    if len(window) == 0:
        raise TooShortError("exponential smoothing needs a non-empty window")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return float(_ses_levels(window[np.newaxis, :], alpha)[0])


def fit_ses_alpha(train: WindowSet) -> float:
    """Grid-search alpha in {0.01, ..., 0.99} for least one-step squared error."""
    if len(train) == 0:
        raise TooShortError("cannot fit alpha on an empty window set")
    errors = [
        np.mean((_ses_levels(train.inputs, alpha) - train.targets) ** 2)
        for alpha in SES_ALPHA_GRID
    ]
    return float(SES_ALPHA_GRID[int(np.argmin(errors))])


@dataclass(frozen=True)
class LinearWindowModel:
    weights: np.ndarray
    bias: float

    def predict(self, inputs) -> np.ndarray:
        return np.asarray(inputs, dtype=np.float64) @ self.weights + self.bias


def fit_linear(train: WindowSet) -> LinearWindowModel:
    """Ordinary least squares on the window inputs with an unpenalized intercept.

    Inputs and targets are centered, the normal equations are solved for the
    weights, and a ridge term of 1e-8 is added when they are rank deficient.
    """
    if len(train) == 0:
        raise TooShortError("cannot fit a linear model on an empty window set")
    x = train.inputs
    y = train.targets
    x_mean = x.mean(axis=0)
    y_mean = float(y.mean())
    xc = x - x_mean
    yc = y - y_mean
    gram = xc.T @ xc
    rhs = xc.T @ yc
    try:
        if np.linalg.matrix_rank(gram) == gram.shape[0]:
            weights = np.linalg.solve(gram, rhs)
        else:
            logger.warning("window design is rank deficient; using ridge lambda=%g", RIDGE_LAMBDA)
            weights = np.linalg.solve(gram + RIDGE_LAMBDA * np.eye(gram.shape[0]), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"normal equations could not be solved: {exc}") from exc
    bias = y_mean - float(x_mean @ weights)
    if not (np.all(np.isfinite(weights)) and np.isfinite(bias)):
        raise SingularSystemError("least-squares solution is not finite")
    return LinearWindowModel(weights=weights, bias=bias)


@dataclass(frozen=True)
class RandomWalkConfig:
    restart_prob: float = 0.15
    max_steps: int = 10_000
    convergence_tol: float = 1e-10
    top_k: int = 5
    weighting: str = "similarity"

    def validate(self):
        problems = []
        check_real(problems, "restart_prob", self.restart_prob, low=0, high=1)
        check_int(problems, "max_steps", self.max_steps, minimum=1)
        check_real(problems, "convergence_tol", self.convergence_tol, low=0)
        check_int(problems, "top_k", self.top_k, minimum=1)
        check_choice(problems, "weighting", self.weighting, WEIGHTINGS)
        return problems


def random_walk_similarity(
    adjacency: AdjacencyMatrix, source: int, cfg: RandomWalkConfig
) -> np.ndarray:
    """Stationary distribution of a walk on the row-normalized adjacency that
    restarts at `source` with probability `cfg.restart_prob`."""
    transition = adjacency.a / node_degrees(adjacency)[:, np.newaxis]
    restart = np.zeros(adjacency.n)
    restart[source] = 1.0
    p = restart.copy()
    for step in range(cfg.max_steps):
        p_next = (1.0 - cfg.restart_prob) * (transition.T @ p) + cfg.restart_prob * restart
        change = np.max(np.abs(p_next - p))
        p = p_next
        if change < cfg.convergence_tol:
            break
    else:
        logger.warning("random walk did not converge in %d steps", cfg.max_steps)
    return p


def vg_randomwalk_forecast(window: Sequence[float], cfg: RandomWalkConfig) -> float:
    """Similarity-weighted average of two-point extrapolations to the next step.

    The nodes most similar to the last node (by random walk with restart on
    the window's visibility graph) are each joined to the last node by a
    straight line, which is evaluated one step past the window.
    """
    values = np.asarray(window, dtype=np.float64)
    n = len(values)
    if n < 3:
        raise LengthError(f"random-walk forecast needs a window of at least 3, got {n}")
    last = n - 1
    similarity = random_walk_similarity(visibility_adjacency(values), last, cfg)

    candidates = np.arange(last)
    # most similar first; ties go to the node nearer in time
    order = np.lexsort((-candidates, -similarity[:last]))
    chosen = order[: cfg.top_k]
    if cfg.weighting == "distance":
        weights = 1.0 / (last - chosen)
    else:
        weights = similarity[chosen]
    mass = weights.sum()
    if not mass > 0:
        raise DegenerateWalkError("selected nodes carry no similarity mass")
    slopes = (values[last] - values[chosen]) / (last - chosen)
    extrapolations = values[last] + slopes
    return float(np.dot(weights / mass, extrapolations))
