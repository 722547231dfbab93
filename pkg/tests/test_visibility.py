"""Tests for the visibility graph, enhanced matrix and DVS compression."""

import json
import time
import unittest

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dvs_forecast.errors import DimensionMismatchError, LengthError, NonFiniteError
from dvs_forecast.visibility import (
    AdjacencyMatrix,
    adjacency_to_csv,
    adjacency_to_json,
    dvs_compress,
    dvs_transform,
    dvs_transform_windows,
    enhanced_matrix,
    node_degrees,
    visibility_adjacency,
    zip_to_csv,
)

FIG2 = [8, 4, 5, 7, 2, 9]
FIG2_EDGES = {(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 3), (1, 4), (1, 6), (2, 4), (4, 6)}
FIG2_ZIP = [6.25, 20 / 3, 19 / 3, 5.6, 8.0, 17 / 3]


def line_of_sight(values):
    """O(n^3) oracle: every point strictly between lies below the chord."""
    n = len(values)
    a = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            a[i, j] = a[j, i] = all(
                values[k] < values[j] + (values[i] - values[j]) * (j - k) / (j - i) for k in range(i + 1, j)
            )
    return a


def neighbour_means(values, a):
    return np.array([np.mean([values[j] for j in np.flatnonzero(row)]) for row in a])


class TestVisibilityAdjacency(unittest.TestCase):
    """Test cases for the natural visibility adjacency."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(2024)

    def test_worked_example_edges(self):
        """Test the six-point worked example."""
        edges = {(i + 1, j + 1) for i, j in visibility_adjacency(FIG2).edges()}
        self.assertEqual(edges, FIG2_EDGES)

    def test_two_points(self):
        """Test that adjacent nodes always see each other."""
        self.assertEqual(visibility_adjacency([1, 2]).edges(), [(0, 1)])

    def test_tie_blocks(self):
        """Test that a point on the chord blocks visibility."""
        self.assertEqual(visibility_adjacency([5, 5, 5]).edges(), [(0, 1), (1, 2)])
        self.assertEqual(visibility_adjacency([0, 1, 2, 3]).edges(), [(0, 1), (1, 2), (2, 3)])

    def test_matches_line_of_sight_oracle(self):
        """Test 200 random series against the brute-force oracle."""
        for _ in range(200):
            values = self.rng.uniform(0, 100, size=int(self.rng.integers(4, 65)))
            assert_array_equal(visibility_adjacency(values).a, line_of_sight(values))

    def test_structure(self):
        """Test symmetry, zero diagonal and the path through adjacent nodes."""
        a = visibility_adjacency(self.rng.normal(size=40)).a
        assert_array_equal(a, a.T)
        self.assertFalse(a.diagonal().any())
        self.assertTrue(all(a[i, i + 1] for i in range(39)))

    def test_reversal(self):
        """Test that reversing the series reverses the graph."""
        values = self.rng.normal(size=30)
        assert_array_equal(visibility_adjacency(values[::-1]).a, visibility_adjacency(values).a[::-1, ::-1])

    def test_affine_invariance(self):
        """Test that positive affine maps keep the graph."""
        values = self.rng.normal(size=30)
        assert_array_equal(visibility_adjacency(3.5 * values - 2.0).a, visibility_adjacency(values).a)

    def test_convex_series_is_complete(self):
        """Test that strictly convex series see everything."""
        a = visibility_adjacency(np.arange(8.0) ** 2).a
        self.assertEqual(int(a.sum()), 8 * 7)

    def test_time_abscissa(self):
        """Test timestamps as node positions."""
        values = [0.0, 2.0, 3.0]
        self.assertEqual(visibility_adjacency(values).edges(), [(0, 1), (1, 2)])
        # moving the middle point next to the right end uncovers the left end
        self.assertEqual(visibility_adjacency(values, abscissa=[0.0, 1.0, 1.1]).edges(), [(0, 1), (0, 2), (1, 2)])

    def test_errors(self):
        """Test short and non-finite inputs."""
        with self.assertRaises(LengthError):
            visibility_adjacency([1.0])
        with self.assertRaises(NonFiniteError):
            visibility_adjacency([1.0, float("nan"), 2.0])
        with self.assertRaises(DimensionMismatchError):
            visibility_adjacency([1.0, 2.0], abscissa=[0.0])


class TestEnhancedMatrix(unittest.TestCase):
    """Test cases for degrees, the enhanced matrix and compression."""

    def setUp(self):
        """Set up test fixtures."""
        self.adjacency = visibility_adjacency(FIG2)

    def test_degrees(self):
        """Test degree examples."""
        assert_array_equal(node_degrees(self.adjacency), [4, 3, 3, 5, 2, 3])
        assert_array_equal(node_degrees(visibility_adjacency([1, 2])), [1, 1])
        path = AdjacencyMatrix(a=np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool))
        assert_array_equal(node_degrees(path), [1, 2, 1])

    def test_worked_example_row(self):
        """Test the first row of the enhanced matrix."""
        b = enhanced_matrix(self.adjacency, FIG2).b
        assert_allclose(b[0], [0.0, 1.0, 1.25, 1.75, 0.0, 2.25], rtol=1e-12)

    def test_two_points(self):
        """Test the enhanced matrix of two points."""
        assert_array_equal(enhanced_matrix(visibility_adjacency([1, 2]), [1, 2]).b, [[0, 2], [1, 0]])

    def test_zero_value_column(self):
        """Test that a zero value empties its column."""
        values = [3.0, 0.0, 4.0, 1.0]
        b = enhanced_matrix(visibility_adjacency(values), values).b
        assert_array_equal(b[:, 1], np.zeros(4))

    def test_sparsity_follows_adjacency(self):
        """Test that B is nonzero exactly where A is, for nonzero values."""
        values = np.random.default_rng(5).uniform(1, 2, size=20)
        adjacency = visibility_adjacency(values)
        assert_array_equal(enhanced_matrix(adjacency, values).b != 0, adjacency.a)

    def test_dimension_mismatch(self):
        """Test that values must match the adjacency size."""
        with self.assertRaises(DimensionMismatchError):
            enhanced_matrix(self.adjacency, [1.0, 2.0])

    def test_worked_example_zip(self):
        """Test compression against neighbour means."""
        z = dvs_compress(enhanced_matrix(self.adjacency, FIG2)).z
        assert_allclose(z, FIG2_ZIP, rtol=1e-12)
        assert_allclose(z, neighbour_means(FIG2, line_of_sight(FIG2)), rtol=1e-12)

    def test_constant_series(self):
        """Test that a constant series compresses to itself."""
        assert_allclose(dvs_transform([4.0] * 9).z, np.full(9, 4.0), rtol=1e-12)


class TestDVSTransform(unittest.TestCase):
    """Test cases for the streaming DVS transform."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(11)

    def test_examples(self):
        """Test the worked examples."""
        assert_allclose(dvs_transform(FIG2).z, FIG2_ZIP, rtol=1e-12)
        assert_array_equal(dvs_transform([1, 2]).z, [2, 1])
        assert_array_equal(dvs_transform([0, 1, 2, 3]).z, [1, 1, 2, 2])

    def test_matches_dense_path(self):
        """Test that streaming equals adjacency, enhanced matrix and row sums."""
        for n in (2, 3, 17, 120):
            values = self.rng.normal(size=n)
            dense = dvs_compress(enhanced_matrix(visibility_adjacency(values), values)).z
            assert_allclose(dvs_transform(values).z, dense, rtol=1e-12, atol=1e-12)

    def test_bounds_and_affine_response(self):
        """Test min <= z <= max and z(a*v + b) = a*z(v) + b."""
        values = self.rng.normal(size=50)
        z = dvs_transform(values).z
        self.assertTrue(np.all(z >= values.min()) and np.all(z <= values.max()))
        assert_allclose(dvs_transform(2.5 * values + 7.0).z, 2.5 * z + 7.0, rtol=1e-9)

    def test_reversal(self):
        """Test that reversing the series reverses z."""
        values = self.rng.normal(size=25)
        assert_allclose(dvs_transform(values[::-1]).z, dvs_transform(values).z[::-1], rtol=1e-12, atol=1e-12)

    def test_windows_in_order(self):
        """Test row-wise transformation of a window matrix."""
        inputs = self.rng.normal(size=(4, 10))
        out = dvs_transform_windows(inputs)
        for row, transformed in zip(inputs, out):
            assert_array_equal(transformed, dvs_transform(row).z)

    @pytest.mark.slow
    def test_quadratic_scaling(self):
        """Test that n = 10000 is fast and doubling n from 4000 costs at most 2.6 times as much."""
        values = self.rng.normal(size=10_000)

        def best_of(n, repeats=3):
            timings = []
            for _ in range(repeats):
                started = time.perf_counter()
                dvs_transform(values[:n])
                timings.append(time.perf_counter() - started)
            return min(timings)

        self.assertLess(best_of(10_000, repeats=1), 5.0)
        self.assertLessEqual(best_of(8_000) / best_of(4_000), 2.6)


class TestExports(unittest.TestCase):
    """Test cases for adjacency and zip exports."""

    def test_adjacency_json(self):
        """Test 0-based sorted edge export."""
        data = json.loads(adjacency_to_json(visibility_adjacency([2, 1, 2])))
        self.assertEqual(data, {"n": 3, "edges": [[0, 1], [0, 2], [1, 2]]})

    def test_adjacency_csv(self):
        """Test the dense 0/1 export."""
        self.assertEqual(adjacency_to_csv(visibility_adjacency([1, 2])), "0,1\n1,0\n")

    def test_zip_csv(self):
        """Test 17-digit zip export."""
        text = zip_to_csv(dvs_transform(FIG2))
        lines = text.splitlines()
        self.assertEqual(lines[0], "index,zip")
        self.assertEqual(lines[1], "0,6.25")
        self.assertEqual(float(lines[2].split(",")[1]), 20 / 3)


if __name__ == "__main__":
    unittest.main()
