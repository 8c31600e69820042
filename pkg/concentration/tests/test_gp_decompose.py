import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from concentration.exceptions import UnsupportedGraph
from concentration.gp_decompose import (
    EdgeDecomposition,
    _minus,
    decompose,
    gp_submatrix,
    gp_weights,
    verify_decomposition,
)
from concentration.graph_model import SeedSpec, SparseGraph, UniformModel, expected_adjacency, sample_directed
from concentration.spectral import inf_to_2_norm_exact

SLACK_LIMIT = math.sqrt(math.pi / 2) * 1.10


class GpWeightsTestCase(SimpleTestCase):
    def test_single_column_ratio_is_one(self):
        weights = gp_weights(np.array([[3.0], [4.0]]))
        np.testing.assert_allclose(weights.mu, [1.0])
        self.assertAlmostEqual(weights.achieved_norm, 5.0)
        self.assertAlmostEqual(weights.ratio, 1.0)

    def test_row_vector(self):
        weights = gp_weights(np.array([[10.0, 1.0, 1.0, 1.0]]))
        self.assertAlmostEqual(weights.inf_to_2, 13.0)
        self.assertTrue(weights.inf_to_2_exact)
        self.assertGreaterEqual(weights.achieved_norm, 13.0 * (1 - 1e-12))
        self.assertLessEqual(weights.achieved_norm, 13.0 * SLACK_LIMIT)

    def test_zero_matrix(self):
        with self.assertRaises(ValueError):
            gp_weights(np.zeros((3, 3)))

    def test_weights_lie_on_the_simplex(self):
        weights = gp_weights(np.random.default_rng(0).uniform(-1, 1, size=(8, 12)))
        self.assertAlmostEqual(weights.mu.sum(), 1.0)
        self.assertTrue(np.all(weights.mu > 0))
        self.assertTrue(np.all(np.diff(weights.history) <= 0))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32))
    def test_left_inequality(self, master_seed):
        matrix = np.random.default_rng(master_seed).uniform(-1, 1, size=(5, 8))
        weights = gp_weights(matrix)
        self.assertLessEqual(inf_to_2_norm_exact(matrix), weights.achieved_norm * (1 + 1e-12))


class GpSubmatrixTestCase(SimpleTestCase):
    def test_delta_range(self):
        with self.assertRaises(ValueError):
            gp_submatrix(np.ones((2, 2)), 1.0)

    def test_certificates(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            matrix = rng.uniform(-1, 1, size=(8, 12))
            weights = gp_weights(matrix)
            for delta in (0.25, 0.5):
                certificate = gp_submatrix(matrix, delta, weights=weights)
                self.assertGreaterEqual(certificate.columns.size, certificate.min_columns - 1e-9)
                self.assertLessEqual(certificate.submatrix_norm, certificate.bound * (1 + 1e-10))


class ProductSetTestCase(SimpleTestCase):
    def test_minus_covers_the_difference(self):
        p = (np.array([0, 1, 2]), np.array([0, 1, 2]))
        q = (np.array([1]), np.array([1]))
        covered = np.zeros((3, 3), dtype=int)
        for rows, cols in _minus(p, q):
            covered[np.ix_(rows, cols)] += 1
        expected = np.ones((3, 3), dtype=int)
        expected[1, 1] = 0
        np.testing.assert_array_equal(covered, expected)


class DecompositionTestCase(SimpleTestCase):
    def test_needs_directed_graph(self):
        with self.assertRaises(UnsupportedGraph):
            decompose(SparseGraph.empty(10), np.zeros((10, 10)), r=1, d=1)

    def test_empty_graph_is_all_normal(self):
        g = SparseGraph.empty(20, directed=True)
        dec = decompose(g, np.zeros((20, 20)), r=1, d=0)
        self.assertTrue(np.all(dec.mask("N")))
        report = verify_decomposition(g, np.zeros((20, 20)), dec, d=0, r=1)
        self.assertTrue(report.structural_ok)
        self.assertIsNone(report.normal_ratio)

    def test_sampled_graph_structure(self):
        model = UniformModel(n=96, p=8 / 96)
        g = sample_directed(model, SeedSpec(21))
        expectation = expected_adjacency(model)
        dec = decompose(g, expectation, r=1, d=8)
        report = verify_decomposition(g, expectation, dec, d=8, r=1)
        self.assertTrue(report.partition_ok)
        self.assertTrue(report.row_bound_ok)
        self.assertTrue(report.col_bound_ok)
        self.assertGreaterEqual(report.rounds, 1)
        self.assertEqual(len(dec.trace_dicts()), report.rounds)

    def test_round_count_and_repeatability(self):
        n = 128
        model = UniformModel(n=n, p=8 / n)
        expectation = expected_adjacency(model)
        for stream in range(3):
            g = sample_directed(model, SeedSpec(22, stream))
            first = decompose(g, expectation, r=1, d=8, seed=stream)
            second = decompose(g, expectation, r=1, d=8, seed=stream)
            self.assertLessEqual(len(first.trace), math.ceil(math.log2(n)) + 1)
            np.testing.assert_array_equal(first.labels, second.labels)
            self.assertEqual(first.trace_dicts(), second.trace_dicts())

    def test_hand_built_overlap_fails_partition(self):
        n = 4
        everything = (np.arange(n), np.arange(n))
        dec = EdgeDecomposition.from_blocks(n, {"N": [everything], "R": [(np.array([0]), np.array([0]))]})
        report = verify_decomposition(SparseGraph.empty(n, directed=True), np.zeros((n, n)), dec, d=1, r=1)
        self.assertFalse(report.partition_ok)

    def test_dense_row_in_row_sparse_class_fails(self):
        n = 40
        g = SparseGraph.from_edges(n, [(0, j) for j in range(1, n)], directed=True)
        dec = EdgeDecomposition.from_blocks(n, {"R": [(np.arange(n), np.arange(n))]})
        report = verify_decomposition(g, np.zeros((n, n)), dec, d=1, r=1)
        self.assertTrue(report.partition_ok)
        self.assertEqual(report.max_row_ones_r, 39)
        self.assertFalse(report.row_bound_ok)
        self.assertTrue(report.col_bound_ok)
        self.assertEqual(report.normal_norm, 0.0)

    def test_pairs_lists_every_pair(self):
        dec = EdgeDecomposition.from_blocks(2, {"N": [([0, 1], [0, 1])]})
        self.assertEqual(list(dec.pairs()), [(0, 0, "N"), (0, 1, "N"), (1, 0, "N"), (1, 1, "N")])


def clique_edges(vertices):
    return [(i, j) for i in vertices for j in vertices if i != j]


class DegenerateBlockTestCase(SimpleTestCase):
    def test_planted_clique_stays_out_of_normal(self):
        n = 64
        clique = range(16)
        g = SparseGraph.from_edges(n, clique_edges(clique), directed=True)
        expectation = np.zeros((n, n))
        dec = decompose(g, expectation, r=1, d=1)
        ones = g.to_dense() > 0
        self.assertFalse(np.any(ones & dec.mask("N")))
        self.assertTrue(np.all(dec.mask("R")[np.ix_(clique, clique)]))
        report = verify_decomposition(g, expectation, dec, d=1, r=1)
        self.assertTrue(report.structural_ok)
        self.assertEqual(report.normal_norm, 0.0)

    def test_block_without_light_rows_is_peeled(self):
        n = 16
        g = SparseGraph.from_edges(n, clique_edges(range(n)), directed=True)
        dec = decompose(g, np.zeros((n, n)), r=1, d=1)
        self.assertEqual(dec.trace[0].outcome, "row_filter_empty")
        self.assertEqual(len(dec.trace), 1)
        self.assertTrue(np.all(dec.mask("R")))
        self.assertIsNone(dec.exceptional)
        report = verify_decomposition(g, np.zeros((n, n)), dec, d=1, r=1)
        self.assertTrue(report.structural_ok)
        self.assertEqual(report.exceptional_pairs, 0)

    def test_dense_block_is_kept_exceptional(self):
        n = 40
        g = SparseGraph.from_edges(n, clique_edges(range(n)), directed=True)
        dec = decompose(g, np.zeros((n, n)), r=1, d=1)
        trace = dec.trace[-1]
        self.assertEqual(trace.outcome, "row_filter_empty")
        np.testing.assert_array_equal(trace.exceptional_rows, np.arange(n))
        np.testing.assert_array_equal(trace.exceptional_cols, np.arange(n))
        self.assertFalse(np.any(dec.mask("N")))
        self.assertTrue(np.all(dec.labels == 3))
        self.assertEqual({label for _, _, label in dec.pairs()}, {"E"})
        report = verify_decomposition(g, np.zeros((n, n)), dec, d=1, r=1)
        self.assertFalse(report.partition_ok)
        self.assertEqual(report.exceptional_pairs, n * n)
        self.assertEqual(report.normal_norm, 0.0)
