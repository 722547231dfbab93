"""Deep Visibility Series forecasting with visibility graphs and small CNNs."""

from .errors import DVSError
from .series import TimeSeries, WindowSet, load_series, make_windows, split_train_test, synth_series
from .training import TrainConfig, predict, train
from .visibility import dvs_transform, enhanced_matrix, visibility_adjacency

__all__ = [
    "DVSError",
    "TimeSeries",
    "WindowSet",
    "load_series",
    "make_windows",
    "split_train_test",
    "synth_series",
    "visibility_adjacency",
    "enhanced_matrix",
    "dvs_transform",
    "TrainConfig",
    "train",
    "predict",
]
__version__ = "0.1.0"
