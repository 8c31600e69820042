import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from concentration.exceptions import UnsupportedGraph, ZeroDegree
from concentration.graph_model import SeedSpec, SparseGraph, UniformModel, sample
from concentration.regularize import (
    RegularizationScheme,
    ShiftedGraph,
    average_degree,
    degrees,
    expected_laplacian,
    high_degree_set,
    laplacian,
    laplacian_deviation_parts,
    laplacian_kernel,
    max_row_l2_squared,
    proportional_reweight,
    remove_vertices,
    tau_shift,
    trim_edges,
)
from concentration.spectral import compose_difference, full_spectrum, materialize, spectral_norm


def star(leaves: int) -> SparseGraph:
    return SparseGraph.from_edges(leaves + 1, [(0, leaf) for leaf in range(1, leaves + 1)])


class DegreeTestCase(SimpleTestCase):
    def test_degrees_and_average(self):
        g = star(4)
        np.testing.assert_array_equal(degrees(g), [4, 1, 1, 1, 1])
        self.assertAlmostEqual(average_degree(g), 8 / 5)

    def test_high_degree_set(self):
        np.testing.assert_array_equal(high_degree_set(star(4), 2), [0])

    def test_high_degree_set_is_small_on_uniform_graphs(self):
        n, d = 2000, 20
        model = UniformModel(n=n, p=d / n)
        for stream in range(20):
            g = sample(model, SeedSpec(23, stream))
            self.assertLessEqual(high_degree_set(g, 2 * d).size, 10 * n / d)

    def test_cap_must_be_positive(self):
        with self.assertRaises(ValueError):
            high_degree_set(star(4), 0)

    def test_max_row_l2_squared_weighted(self):
        g = SparseGraph.from_edges(3, [(0, 1, 0.5), (0, 2, 0.5)])
        self.assertAlmostEqual(max_row_l2_squared(g), 0.5)


class RegularizerTestCase(SimpleTestCase):
    def test_remove_vertices_clears_rows_and_columns(self):
        g = remove_vertices(star(4), [0])
        self.assertEqual(g.num_edges, 0)

    def test_trim_star_keeps_lowest_leaves(self):
        trimmed = trim_edges(star(10), 5)
        neighbours = sorted(j for i, j, _ in trimmed.edges() if i == 0)
        self.assertEqual(neighbours, [1, 2, 3, 4, 5])

    def test_trim_rejects_weighted_graphs(self):
        with self.assertRaises(UnsupportedGraph):
            trim_edges(SparseGraph.from_edges(2, [(0, 1, 0.5)]), 1)

    def test_trim_below_cap_is_identity(self):
        g = star(3)
        self.assertIs(trim_edges(g, 3), g)

    def test_reweight_star(self):
        g = proportional_reweight(star(4), 2)
        # Centre factor 1/2, leaves 1: every edge weight sqrt(1/2).
        np.testing.assert_allclose(g.to_dense()[0, 1:], np.sqrt(0.5))
        self.assertLessEqual(max_row_l2_squared(g), 2 + 1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32), st.floats(1.0, 8.0))
    def test_regularizers_respect_the_cap(self, master_seed, cap):
        g = sample(UniformModel(n=60, p=0.1), SeedSpec(master_seed))
        initial = degrees(g)
        high = initial > cap

        trimmed = trim_edges(g, cap)
        self.assertLessEqual(degrees(trimmed).max(initial=0.0), cap)
        removed = g.to_dense() - trimmed.to_dense()
        self.assertTrue(np.all(removed >= 0))
        rows, cols = np.nonzero(removed)
        self.assertTrue(np.all(high[rows] | high[cols]))

        reweighted = proportional_reweight(g, cap)
        self.assertLessEqual(max_row_l2_squared(reweighted), cap * (1 + 1e-12))
        changed = np.abs(reweighted.to_dense() - g.to_dense()) > 0
        rows, cols = np.nonzero(changed)
        self.assertTrue(np.all(high[rows] | high[cols]))

        pruned = remove_vertices(g, high_degree_set(g, cap))
        self.assertLessEqual(degrees(pruned).max(initial=0.0), cap)


class SchemeTestCase(SimpleTestCase):
    def test_unknown_scheme(self):
        with self.assertRaises(ValueError):
            RegularizationScheme(kind="shrink")

    def test_fixed_cap_required(self):
        with self.assertRaises(ValueError):
            RegularizationScheme(kind="trim")

    def test_max_rate_cap_rule(self):
        scheme = RegularizationScheme.from_dict({"scheme": "trim", "cap_rule": "max_rate", "cap_factor": 2})
        model = UniformModel(n=100, p=0.03)
        self.assertAlmostEqual(scheme.resolve_cap(SparseGraph.empty(100), model), 6.0)

    def test_average_degree_cap_rule(self):
        scheme = RegularizationScheme(kind="reweight", cap_rule="average_degree")
        self.assertAlmostEqual(scheme.resolve_cap(star(4)), 8 / 5)

    def test_tau_scheme_returns_shifted_graph(self):
        shifted = RegularizationScheme(kind="tau", tau=2.0).apply(star(2))
        self.assertIsInstance(shifted, ShiftedGraph)
        np.testing.assert_allclose(shifted.degrees(), [4.0, 3.0, 3.0])

    def test_dict_round_trip(self):
        scheme = RegularizationScheme(kind="trim", cap=4.0)
        self.assertEqual(RegularizationScheme.from_dict(scheme.to_dict()), scheme)


class LaplacianTestCase(SimpleTestCase):
    def test_triangle(self):
        k3 = SparseGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
        np.testing.assert_allclose(full_spectrum(materialize(laplacian(k3))), [0.0, 1.5, 1.5], atol=1e-12)

    def test_isolated_vertex_needs_shift(self):
        g = SparseGraph.from_edges(3, [(0, 1)])
        with self.assertRaises(ZeroDegree):
            laplacian(g)
        laplacian(tau_shift(g, 0.5))

    def test_negative_tau(self):
        with self.assertRaises(ValueError):
            tau_shift(star(2), -1.0)

    def test_shifted_graph_operator(self):
        shifted = tau_shift(star(2), 3.0)
        expected = star(2).to_dense() + 1.0
        np.testing.assert_allclose(materialize(shifted.operator()), expected)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32), st.floats(0.05, 0.5), st.floats(0.1, 5.0))
    def test_spectrum_in_unit_interval_and_kernel(self, master_seed, p, tau):
        g = tau_shift(sample(UniformModel(n=40, p=p), SeedSpec(master_seed)), tau)
        op = laplacian(g)
        values = full_spectrum(materialize(op))
        self.assertGreaterEqual(values.min(), -1e-9)
        self.assertLessEqual(values.max(), 2 + 1e-9)
        self.assertLessEqual(np.linalg.norm(op.apply(laplacian_kernel(g))), 1e-9 * 40)

    def test_empty_graph_matches_expectation(self):
        model = UniformModel(n=30, p=0.0)
        g = sample(model, SeedSpec(1))
        difference = compose_difference(laplacian(tau_shift(g, 2.0)), expected_laplacian(model, 2.0))
        self.assertEqual(spectral_norm(difference), 0.0)

    def test_deviation_parts_sum_to_the_deviation(self):
        model = UniformModel(n=30, p=0.2)
        g = sample(model, SeedSpec(4))
        tau = 3.0
        deviation = materialize(laplacian(tau_shift(g, tau))) - materialize(expected_laplacian(model, tau))
        parts = laplacian_deviation_parts(g, model, tau)
        total = materialize(parts.fluctuation) + materialize(parts.degree_mismatch)
        np.testing.assert_allclose(deviation, -total, atol=1e-12)
