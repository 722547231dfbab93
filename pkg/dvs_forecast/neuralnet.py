"""Minimal 1-D convolutional layer stack with exact backpropagation.

Activations are float64 arrays shaped `(channels, length)` until a flatten or
dense layer turns them into vectors. Convolutions are cross-correlations
with valid padding and stride 1; max pooling drops a trailing partial
block.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import NonFiniteError, ShapeError, TapeMismatchError

Shape = Tuple[int, ...]


class LayerKind(Enum):
    """Enumeration of supported layer types."""

    CONV1D = "conv1d"
    MAXPOOL1D = "maxpool1d"
    RELU = "relu"
    FLATTEN = "flatten"
    DENSE = "dense"


@dataclass(frozen=True)
class LayerSpec:
    """Describes one layer; only the fields of its kind are set."""

    kind: LayerKind
    in_channels: Optional[int] = None
    out_channels: Optional[int] = None
    kernel_size: Optional[int] = None
    pool_size: Optional[int] = None
    in_features: Optional[int] = None
    out_features: Optional[int] = None

    def __post_init__(self):
        for name in _KIND_FIELDS[self.kind]:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ShapeError(f"{self.kind.value}: {name} must be a positive integer, got {value!r}")

    @classmethod
    def conv1d(cls, in_channels: int, out_channels: int, kernel_size: int) -> "LayerSpec":
        return cls(LayerKind.CONV1D, in_channels=in_channels, out_channels=out_channels, kernel_size=kernel_size)

    @classmethod
    def maxpool1d(cls, pool_size: int) -> "LayerSpec":
        return cls(LayerKind.MAXPOOL1D, pool_size=pool_size)

    @classmethod
    def relu(cls) -> "LayerSpec":
        return cls(LayerKind.RELU)

    @classmethod
    def flatten(cls) -> "LayerSpec":
        return cls(LayerKind.FLATTEN)

    @classmethod
    def dense(cls, in_features: int, out_features: int) -> "LayerSpec":
        return cls(LayerKind.DENSE, in_features=in_features, out_features=out_features)

    def weight_shape(self) -> Optional[Shape]:
        if self.kind is LayerKind.CONV1D:
            return (self.out_channels, self.in_channels, self.kernel_size)
        if self.kind is LayerKind.DENSE:
            return (self.out_features, self.in_features)
        return None

    def parameter_count(self) -> int:
        shape = self.weight_shape()
        if shape is None:
            return 0
        return math.prod(shape) + shape[0]

    def output_shape(self, shape: Shape) -> Shape:
        """Shape produced from `shape`; ShapeError if it does not compose."""
        kind = self.kind
        if kind in (LayerKind.CONV1D, LayerKind.MAXPOOL1D) and len(shape) != 2:
            raise ShapeError(f"{kind.value} expects (channels, length), got {shape}")
        if kind is LayerKind.CONV1D:
            channels, length = shape
            if channels != self.in_channels:
                raise ShapeError(f"conv1d expects {self.in_channels} channels, got {channels}")
            out_len = length - self.kernel_size + 1
            if out_len < 1:
                raise ShapeError(f"conv1d kernel {self.kernel_size} does not fit length {length}")
            return (self.out_channels, out_len)
        if kind is LayerKind.MAXPOOL1D:
            channels, length = shape
            out_len = length // self.pool_size
            if out_len < 1:
                raise ShapeError(f"maxpool1d of size {self.pool_size} empties length {length}")
            return (channels, out_len)
        if kind is LayerKind.RELU:
            return shape
        if kind is LayerKind.FLATTEN:
            return (math.prod(shape),)
        features = math.prod(shape)
        if features != self.in_features:
            raise ShapeError(f"dense expects {self.in_features} features, got {features}")
        return (self.out_features,)

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind.value}
        data.update({name: getattr(self, name) for name in _KIND_FIELDS[self.kind]})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LayerSpec":
        data = dict(data)
        try:
            kind = LayerKind(data.pop("kind"))
        except (KeyError, ValueError) as exc:
            raise ShapeError(f"invalid layer kind in {data!r}") from exc
        unknown = set(data) - set(_KIND_FIELDS[kind])
        if unknown:
            raise ShapeError(f"{kind.value}: unexpected fields {sorted(unknown)}")
        return cls(kind, **data)


_KIND_FIELDS = {
    LayerKind.CONV1D: ("in_channels", "out_channels", "kernel_size"),
    LayerKind.MAXPOOL1D: ("pool_size",),
    LayerKind.RELU: (),
    LayerKind.FLATTEN: (),
    LayerKind.DENSE: ("in_features", "out_features"),
}


def compose_shapes(layers: Sequence[LayerSpec], input_len: int) -> List[Shape]:
    """Every activation shape from input to output, validating composition."""
    if input_len < 1:
        raise ShapeError(f"input_len must be positive, got {input_len}")
    shapes = [(1, input_len)]
    for spec in layers:
        shapes.append(spec.output_shape(shapes[-1]))
    return shapes


def parameter_count(layers: Sequence[LayerSpec]) -> int:
    return sum(spec.parameter_count() for spec in layers)


class LayerStack:
    """An ordered layer list with one flat parameter store."""

    def __init__(
        self,
        layers: Sequence[LayerSpec],
        input_len: int,
        params: Optional[np.ndarray] = None,
    ):
        self.layers: List[LayerSpec] = list(layers)
        self.input_len = input_len
        self.shapes = compose_shapes(self.layers, input_len)
        if math.prod(self.shapes[-1]) != 1:
            raise ShapeError(f"stack must end in a single output, got shape {self.shapes[-1]}")
        counts = [spec.parameter_count() for spec in self.layers]
        self.offsets = [0] + list(np.cumsum(counts, dtype=np.int64))
        if params is None:
            params = np.zeros(self.n_params)
        params = np.array(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ShapeError(f"expected {self.n_params} parameters, got {params.shape}")
        self.params = params

    @property
    def n_params(self) -> int:
        return int(self.offsets[-1])

    def signature(self) -> Tuple:
        return (tuple(self.layers), self.input_len)

    def layer_views(self, index: int, store: Optional[np.ndarray] = None):
        """`(weights, bias)` views of layer `index` into `store`, or None."""
        store = self.params if store is None else store
        shape = self.layers[index].weight_shape()
        if shape is None:
            return None
        begin = int(self.offsets[index])
        size = math.prod(shape)
        weights = store[begin : begin + size].reshape(shape)
        bias = store[begin + size : begin + size + shape[0]]
        return weights, bias

    def copy(self) -> "LayerStack":
        return LayerStack(self.layers, self.input_len, self.params.copy())


@dataclass
class ForwardTape:
    """Per-layer caches recorded by `forward`, consumed by `backward`."""

    signature: Tuple
    caches: List[Any] = field(default_factory=list)
    consumed: bool = False


def init_params(stack: LayerStack, rng: np.random.Generator) -> None:
    """Glorot-uniform weights, zero biases, drawn layer by layer."""
    stack.params[:] = 0.0
    for index, spec in enumerate(stack.layers):
        views = stack.layer_views(index)
        if views is None:
            continue
        weights, _ = views
        if spec.kind is LayerKind.CONV1D:
            fan_in = spec.in_channels * spec.kernel_size
            fan_out = spec.out_channels * spec.kernel_size
        else:
            fan_in, fan_out = spec.in_features, spec.out_features
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights[...] = rng.uniform(-limit, limit, size=weights.shape)


def _conv_forward(spec, params, x):
    weights, bias = params
    cols = sliding_window_view(x, spec.kernel_size, axis=1)
    out = np.tensordot(weights, cols, axes=([1, 2], [0, 2])) + bias[:, np.newaxis]
    return out, x


def _conv_backward(spec, params, grads, x, g):
    weights, _ = params
    d_weights, d_bias = grads
    cols = sliding_window_view(x, spec.kernel_size, axis=1)
    d_weights += np.tensordot(g, cols, axes=([1], [1]))
    d_bias += g.sum(axis=1)
    out_len = g.shape[1]
    dx = np.zeros_like(x)
    for k in range(spec.kernel_size):
        dx[:, k : k + out_len] += weights[:, :, k].T @ g
    return dx


def _pool_forward(spec, params, x):
    channels, length = x.shape
    out_len = length // spec.pool_size
    blocks = x[:, : out_len * spec.pool_size].reshape(channels, out_len, spec.pool_size)
    # argmax keeps the first index on ties
    arg = blocks.argmax(axis=2)
    out = np.take_along_axis(blocks, arg[..., np.newaxis], axis=2)[..., 0]
    return out, (x.shape, arg)


def _pool_backward(spec, params, grads, cache, g):
    shape, arg = cache
    dx = np.zeros(shape)
    rows = np.arange(shape[0])[:, np.newaxis]
    cols = np.arange(arg.shape[1])[np.newaxis, :] * spec.pool_size + arg
    dx[rows, cols] = g
    return dx


def _relu_forward(spec, params, x):
    mask = x > 0
    return np.where(mask, x, 0.0), mask


def _relu_backward(spec, params, grads, mask, g):
    return g * mask


def _flatten_forward(spec, params, x):
    return x.reshape(-1), x.shape


def _flatten_backward(spec, params, grads, shape, g):
    return g.reshape(shape)


def _dense_forward(spec, params, x):
    weights, bias = params
    return weights @ x.reshape(-1) + bias, x


def _dense_backward(spec, params, grads, x, g):
    weights, _ = params
    d_weights, d_bias = grads
    d_weights += np.outer(g, x.reshape(-1))
    d_bias += g
    return (weights.T @ g).reshape(x.shape)


_FORWARD = {
    LayerKind.CONV1D: _conv_forward,
    LayerKind.MAXPOOL1D: _pool_forward,
    LayerKind.RELU: _relu_forward,
    LayerKind.FLATTEN: _flatten_forward,
    LayerKind.DENSE: _dense_forward,
}

_BACKWARD = {
    LayerKind.CONV1D: _conv_backward,
    LayerKind.MAXPOOL1D: _pool_backward,
    LayerKind.RELU: _relu_backward,
    LayerKind.FLATTEN: _flatten_backward,
    LayerKind.DENSE: _dense_backward,
}


def layer_forward(spec: LayerSpec, params, x: np.ndarray) -> Tuple[np.ndarray, Any]:
    """One layer's output and backward cache; `params` is `(weights, bias)` or None."""
    return _FORWARD[spec.kind](spec, params, x)


def layer_backward(spec: LayerSpec, params, grads, cache: Any, g: np.ndarray) -> np.ndarray:
    """Gradient with respect to the layer input. Parameter gradients are
    added into `grads`, laid out like `params`."""
    return _BACKWARD[spec.kind](spec, params, grads, cache, g)


def forward(stack: LayerStack, values: Sequence[float]) -> Tuple[float, ForwardTape]:
    """Scalar prediction for one input window, plus the tape for `backward`."""
    x = np.asarray(values, dtype=np.float64)
    if x.shape != (stack.input_len,):
        raise ShapeError(f"expected input of length {stack.input_len}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("network input contains NaN or infinity")
    tape = ForwardTape(signature=stack.signature())
    activation = x.reshape(1, -1)
    for index, spec in enumerate(stack.layers):
        activation, cache = layer_forward(spec, stack.layer_views(index), activation)
        tape.caches.append(cache)
    prediction = float(activation.reshape(-1)[0])
    if not math.isfinite(prediction):
        raise NonFiniteError("network output overflowed")
    return prediction, tape


def backward(stack: LayerStack, tape: ForwardTape, upstream_grad: float) -> np.ndarray:
    """Gradient of `prediction * upstream_grad` with respect to every parameter."""
    if tape.consumed:
        raise TapeMismatchError("tape was already consumed by a backward pass")
    if tape.signature != stack.signature() or len(tape.caches) != len(stack.layers):
        raise TapeMismatchError("tape was recorded on a different stack")
    tape.consumed = True
    grads = np.zeros(stack.n_params)
    g = np.full(stack.shapes[-1], float(upstream_grad))
    for index in reversed(range(len(stack.layers))):
        spec = stack.layers[index]
        g = layer_backward(
            spec,
            stack.layer_views(index),
            stack.layer_views(index, grads),
            tape.caches[index],
            g,
        )
    return grads


def _with_dense_head(body: List[LayerSpec], input_len: int, head: Sequence[int]) -> LayerStack:
    features = math.prod(compose_shapes(body, input_len)[-1])
    layers = list(body)
    for width in head:
        if layers and layers[-1].kind is LayerKind.DENSE:
            layers.append(LayerSpec.relu())
        layers.append(LayerSpec.dense(features, width))
        features = width
    return LayerStack(layers, input_len)


def build_dvs_cnn(input_len: int) -> LayerStack:
    """Two conv/pool blocks and a linear output (the DVS+CNN learner)."""
    body = [
        LayerSpec.conv1d(1, 8, 3),
        LayerSpec.relu(),
        LayerSpec.maxpool1d(2),
        LayerSpec.conv1d(8, 16, 3),
        LayerSpec.relu(),
        LayerSpec.maxpool1d(2),
        LayerSpec.flatten(),
    ]
    return _with_dense_head(body, input_len, [1])


def build_ablation_ann(input_len: int) -> LayerStack:
    """One hidden layer of 100 ReLU units."""
    return _with_dense_head([], input_len, [100, 1])


def build_ablation_cnn(input_len: int) -> LayerStack:
    """64 filters of width 2, one pooling layer and a 100-unit dense layer."""
    body = [
        LayerSpec.conv1d(1, 64, 2),
        LayerSpec.relu(),
        LayerSpec.maxpool1d(2),
        LayerSpec.flatten(),
    ]
    return _with_dense_head(body, input_len, [100, 1])


ARCHITECTURES = {
    "dvs-cnn": build_dvs_cnn,
    "ablation-cnn": build_ablation_cnn,
    "ann": build_ablation_ann,
}


def stack_to_dict(stack: LayerStack, seed: Optional[int] = None) -> Dict[str, Any]:
    return {
        "arch": [spec.to_dict() for spec in stack.layers],
        "input_len": stack.input_len,
        "params": stack.params.tolist(),
        "seed": seed,
    }


def stack_from_dict(data: Dict[str, Any]) -> LayerStack:
    layers = [LayerSpec.from_dict(item) for item in data["arch"]]
    return LayerStack(layers, int(data["input_len"]), np.array(data["params"], dtype=np.float64))


def stack_to_json(stack: LayerStack, seed: Optional[int] = None) -> str:
    return json.dumps(stack_to_dict(stack, seed))


def stack_from_json(text: str) -> LayerStack:
    return stack_from_dict(json.loads(text))
