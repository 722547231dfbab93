"""Natural visibility graph, enhanced matrix and ZIP compression.

A series `v` is mapped to its visibility adjacency `A`, then to the enhanced
matrix `B[i, j] = A[i, j] * v[j] / degree[i]`, and finally compressed back to
one value per node by row-summing `B`. The composition is the Deep
Visibility Series (DVS) transform.
"""

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError, LengthError, NonFiniteError
from .series import format_real

# Relative tolerance for comparing backward slopes; a point within it of the
# sight line counts as on the line and blocks visibility.
SLOPE_RTOL = 1e-12


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric boolean visibility matrix with zero diagonal."""

    a: np.ndarray

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def edges(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.a, k=1))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]


@dataclass(frozen=True)
class EnhancedMatrix:
    """Value-weighted, degree-normalized visibility matrix."""

    b: np.ndarray
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class ZipSeries:
    """Per-node mean of the values that node can see."""

    z: np.ndarray

    def __len__(self) -> int:
        return len(self.z)


def _as_values(values: Sequence[float]) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or len(values) < 2:
        raise LengthError(f"visibility needs a 1-D sequence of length >= 2, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("visibility input contains NaN or infinity")
    return values


def _as_abscissa(abscissa: Optional[Sequence[float]], n: int) -> np.ndarray:
    if abscissa is None:
        return np.arange(n, dtype=np.float64)
    x = np.asarray(abscissa, dtype=np.float64)
    if x.shape != (n,):
        raise DimensionMismatchError(f"abscissa has shape {x.shape}, expected ({n},)")
    if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
        raise ValueError("abscissa must be finite and strictly increasing")
    return x


def visible_predecessors(values: np.ndarray, x: np.ndarray, j: int) -> np.ndarray:
    """Boolean mask over nodes 0..j-1 that see node j.

    Node i sees j when its backward slope (v[i] - v[j]) / (x[j] - x[i]) is
    strictly greater than every backward slope of the nodes between them.
    """
    slopes = (values[:j] - values[j]) / (x[j] - x[:j])
    visible = np.zeros(j, dtype=bool)
    visible[j - 1] = True
    if j > 1:
        # blocking[i] = max slope over i+1 .. j-1
        blocking = np.maximum.accumulate(slopes[:0:-1])[::-1]
        head = slopes[:-1]
        margin = SLOPE_RTOL * np.maximum(np.abs(head), np.abs(blocking))
        visible[:-1] = head - blocking > margin
    return visible


def visibility_adjacency(
    values: Sequence[float], abscissa: Optional[Sequence[float]] = None
) -> AdjacencyMatrix:
    """Natural visibility adjacency, O(n^2)."""
    values = _as_values(values)
    n = len(values)
    x = _as_abscissa(abscissa, n)
    a = np.zeros((n, n), dtype=bool)
    for j in range(1, n):
        a[:j, j] = visible_predecessors(values, x, j)
    a |= a.T
    return AdjacencyMatrix(a=a)


def node_degrees(adjacency: AdjacencyMatrix) -> np.ndarray:
    return adjacency.a.sum(axis=1).astype(np.int64)


def enhanced_matrix(
    adjacency: AdjacencyMatrix, values: Sequence[float]
) -> EnhancedMatrix:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (adjacency.n,):
        raise DimensionMismatchError(
            f"adjacency is {adjacency.n}x{adjacency.n} but values have shape {values.shape}"
        )
    degrees = node_degrees(adjacency)
    b = adjacency.a * values[np.newaxis, :] / degrees[:, np.newaxis]
    return EnhancedMatrix(b=b, degrees=degrees)


def dvs_compress(enhanced: EnhancedMatrix) -> ZipSeries:
    return ZipSeries(z=enhanced.b.sum(axis=1))


def dvs_transform(
    values: Sequence[float], abscissa: Optional[Sequence[float]] = None
) -> ZipSeries:
    """Adjacency, enhanced matrix and compression in one O(n^2) pass.

    Edges are streamed into per-node sums and degree counts, so memory stays
    O(n) and the dense matrices are never built.
    """
    values = _as_values(values)
    n = len(values)
    x = _as_abscissa(abscissa, n)
    sums = np.zeros(n)
    degrees = np.zeros(n, dtype=np.int64)
    for j in range(1, n):
        seen = np.flatnonzero(visible_predecessors(values, x, j))
        sums[seen] += values[j]
        degrees[seen] += 1
        sums[j] += values[seen].sum()
        degrees[j] += len(seen)
    return ZipSeries(z=sums / degrees)


def dvs_transform_windows(inputs: np.ndarray) -> np.ndarray:
    """Apply `dvs_transform` to every row of a window matrix, in order."""
    inputs = np.asarray(inputs, dtype=np.float64)
    out = np.empty_like(inputs)
    for k, row in enumerate(inputs):
        out[k] = dvs_transform(row).z
    return out


def adjacency_to_json(adjacency: AdjacencyMatrix) -> str:
    return json.dumps({"n": adjacency.n, "edges": [list(e) for e in adjacency.edges()]})


def adjacency_to_csv(adjacency: AdjacencyMatrix) -> str:
    rows = (",".join("1" if cell else "0" for cell in row) for row in adjacency.a)
    return "\n".join(rows) + "\n"


def enhanced_to_csv(enhanced: EnhancedMatrix) -> str:
    rows = (",".join(format_real(cell) for cell in row) for row in enhanced.b)
    return "\n".join(rows) + "\n"


def zip_to_csv(zip_series: ZipSeries) -> str:
    lines = ["index,zip"]
    lines.extend(f"{i},{value:.17g}" for i, value in enumerate(zip_series.z))
    return "\n".join(lines) + "\n"
