import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from concentration.exceptions import DimensionMismatch, EntryOutOfRange, SizeExceeded, WidthExceeded
from concentration.graph_model import BlockTwoModel, RankOneModel, expected_adjacency
from concentration.spectral import (
    LinearOp,
    compose_difference,
    diagonal,
    full_spectrum,
    inf_to_2_norm_exact,
    inf_to_2_norm_lower,
    l1_operator_bound,
    l2_sparsity_bound,
    materialize,
    restrict,
    restrict_blocks,
    restrict_entries,
    second_smallest_eigenpair,
    spectral_norm,
    top_k_eigs,
)

small_matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 8), st.integers(1, 8)),
    elements=st.floats(-1.0, 1.0, allow_nan=False, width=64),
)
unit_matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 8), st.integers(1, 8)),
    elements=st.floats(0.0, 1.0, allow_nan=False, width=64),
)


class LinearOpTestCase(SimpleTestCase):
    def test_non_symmetric_operator_needs_transpose(self):
        with self.assertRaises(ValueError):
            LinearOp((2, 3), lambda x: x[:2])

    def test_from_matrix_detects_symmetry(self):
        self.assertTrue(LinearOp.from_matrix(np.array([[1.0, 2.0], [2.0, 1.0]])).symmetric)
        self.assertFalse(LinearOp.from_matrix(np.array([[1.0, 2.0], [0.0, 1.0]])).symmetric)

    def test_apply_accepts_blocks(self):
        matrix = np.arange(6, dtype=float).reshape(2, 3)
        op = LinearOp.from_matrix(matrix)
        block = np.ones((3, 2))
        np.testing.assert_allclose(op.apply(block), matrix @ block)
        np.testing.assert_allclose(op.apply_transpose(np.ones(2)), matrix.T @ np.ones(2))

    def test_compose_difference_shape_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            compose_difference(np.eye(2), np.eye(3))

    def test_restrict_keeps_only_the_block(self):
        matrix = np.arange(1, 10, dtype=float).reshape(3, 3)
        expected = np.zeros((3, 3))
        expected[0, 1] = matrix[0, 1]
        np.testing.assert_allclose(materialize(restrict(matrix, [0], [1])), expected)

    def test_restrict_blocks_sums_disjoint_blocks(self):
        matrix = np.arange(1, 10, dtype=float).reshape(3, 3)
        op = restrict_blocks(matrix, [(np.array([0]), np.array([0, 1])), (np.array([2]), np.array([2]))])
        expected = np.zeros((3, 3))
        expected[0, :2] = matrix[0, :2]
        expected[2, 2] = matrix[2, 2]
        np.testing.assert_allclose(materialize(op), expected)
        np.testing.assert_allclose(materialize(op.T), expected.T)


class SpectralNormTestCase(SimpleTestCase):
    def test_diagonal(self):
        self.assertAlmostEqual(spectral_norm(diagonal([3.0, -5.0])), 5.0, places=5)

    def test_zero_operator(self):
        self.assertEqual(spectral_norm(np.zeros((4, 4))), 0.0)

    def test_matches_dense_singular_value(self):
        rng = np.random.default_rng(3)
        matrix = rng.standard_normal((40, 30))
        expected = sla.svdvals(matrix)[0]
        self.assertAlmostEqual(spectral_norm(matrix, tol=1e-10, max_iter=20000) / expected, 1.0, places=4)

    def test_tolerance_must_be_positive(self):
        with self.assertRaises(ValueError):
            spectral_norm(np.eye(2), tol=0.0)


class EigenTestCase(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(11)
        matrix = rng.standard_normal((80, 80))
        self.matrix = (matrix + matrix.T) / 2

    def test_top_k_matches_full_spectrum(self):
        pairs = top_k_eigs(self.matrix, 5, which="LA")
        expected = np.sort(full_spectrum(self.matrix))[::-1][:5]
        np.testing.assert_allclose([value for value, _ in pairs], expected, atol=1e-8)
        for value, vector in pairs:
            self.assertLessEqual(np.linalg.norm(self.matrix @ vector - value * vector), 1e-8 * max(1.0, abs(value)))

    def test_smallest_algebraic(self):
        (value, _), = top_k_eigs(self.matrix, 1, which="SA")
        self.assertAlmostEqual(value, full_spectrum(self.matrix)[0], places=8)

    def test_top_k_rejects_non_symmetric(self):
        with self.assertRaises(ValueError):
            top_k_eigs(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)

    def test_full_spectrum_complete_graph(self):
        k3 = np.ones((3, 3)) - np.eye(3)
        np.testing.assert_allclose(full_spectrum(k3), [-1.0, -1.0, 2.0], atol=1e-12)

    def test_full_spectrum_trace_identity(self):
        values = full_spectrum(self.matrix)
        scale = np.abs(values).max()
        self.assertLessEqual(abs(values.sum() - np.trace(self.matrix)), 1e-8 * 80 * scale)

    @override_settings(GRAPH_CONCENTRATION={"FULL_SPECTRUM_MAX_N": 4})
    def test_full_spectrum_size_limit(self):
        with self.assertRaises(SizeExceeded):
            full_spectrum(np.eye(5))

    def test_second_smallest_eigenpair_of_path_laplacian(self):
        # Normalized Laplacian of the path on three vertices: eigenvalues 0, 1, 2.
        adjacency = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        deg = adjacency.sum(axis=1)
        scale = np.diag(1 / np.sqrt(deg))
        laplacian = np.eye(3) - scale @ adjacency @ scale
        value, vector = second_smallest_eigenpair(laplacian, np.sqrt(deg))
        self.assertAlmostEqual(value, 1.0, places=10)
        self.assertAlmostEqual(abs(vector @ np.sqrt(deg)), 0.0, places=10)


class SignNormTestCase(SimpleTestCase):
    def test_exact_row_vector(self):
        self.assertAlmostEqual(inf_to_2_norm_exact(np.array([[10.0, 1.0, 1.0, 1.0]])), 13.0)

    def test_exact_identity(self):
        self.assertAlmostEqual(inf_to_2_norm_exact(np.eye(2)), np.sqrt(2.0))

    def test_exact_width_limit(self):
        with self.assertRaises(WidthExceeded):
            inf_to_2_norm_exact(np.ones((2, 25)))

    def test_lower_bound_below_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            matrix = rng.uniform(-1, 1, size=(6, 14))
            self.assertLessEqual(inf_to_2_norm_lower(matrix, trials=4), inf_to_2_norm_exact(matrix) * (1 + 1e-12))

    def test_lower_bound_exact_when_trials_cover_the_cube(self):
        matrix = np.random.default_rng(2).standard_normal((4, 6))
        self.assertAlmostEqual(inf_to_2_norm_lower(matrix, trials=32), inf_to_2_norm_exact(matrix))


class NormBoundTestCase(SimpleTestCase):
    @settings(max_examples=200, deadline=None)
    @given(small_matrices)
    def test_l1_bound_dominates_spectral_norm(self, matrix):
        norm = sla.svdvals(matrix)[0]
        self.assertLessEqual(norm, l1_operator_bound(matrix) * (1 + 1e-9) + 1e-12)

    @settings(max_examples=200, deadline=None)
    @given(unit_matrices)
    def test_l2_sparsity_bound_dominates_spectral_norm(self, matrix):
        norm = sla.svdvals(matrix)[0]
        self.assertLessEqual(norm, l2_sparsity_bound(matrix) * (1 + 1e-9) + 1e-12)

    def test_l2_sparsity_bound_sparse_input(self):
        matrix = sp.csr_matrix(np.array([[1.0, 0.0], [1.0, 1.0]]))
        self.assertAlmostEqual(l2_sparsity_bound(matrix), 2.0)

    def test_l2_sparsity_bound_rejects_negative_entries(self):
        with self.assertRaises(EntryOutOfRange):
            l2_sparsity_bound(np.array([[0.5, -0.1]]))


def operator_family(rng):
    matrix = rng.standard_normal((7, 5))
    square = rng.standard_normal((6, 6))
    return [
        LinearOp.from_matrix(matrix),
        compose_difference(matrix, 0.5 * matrix),
        restrict(matrix, [0, 2, 3], [1, 4]),
        restrict_blocks(square, [(np.array([0, 1]), np.array([2, 3])), (np.array([4]), np.array([0, 5]))]),
        expected_adjacency(BlockTwoModel(n=6, a=4, b=1)),
        expected_adjacency(RankOneModel(n=6, theta=np.linspace(0.2, 0.9, 6))),
    ]


class OperatorContractTestCase(SimpleTestCase):
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_linearity_and_adjoint(self, master_seed):
        rng = np.random.default_rng(master_seed)
        for op in operator_family(rng):
            rows, cols = op.shape
            x, y, z = rng.standard_normal(cols), rng.standard_normal(cols), rng.standard_normal(rows)
            alpha, beta = rng.standard_normal(2)
            combined = op.apply(alpha * x + beta * y)
            expected = alpha * op.apply(x) + beta * op.apply(y)
            np.testing.assert_allclose(combined, expected, rtol=1e-12, atol=1e-12 * (1 + np.abs(expected).max()))
            left, right = op.apply(x) @ z, x @ op.apply_transpose(z)
            self.assertLessEqual(abs(left - right), 1e-12 * (1 + abs(left)) * cols)

    def test_symmetric_operators_are_self_adjoint(self):
        rng = np.random.default_rng(4)
        for op in operator_family(rng):
            if not op.symmetric:
                continue
            x, y = rng.standard_normal(op.shape[1]), rng.standard_normal(op.shape[1])
            self.assertAlmostEqual(op.apply(x) @ y, x @ op.apply(y), places=10)

    def test_transpose_has_the_same_norm(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            op = LinearOp.from_matrix(rng.standard_normal((9, 6)))
            norm = spectral_norm(op, seed=1)
            self.assertLess(abs(spectral_norm(op.T, seed=2) / norm - 1.0), 1e-4)
            self.assertLess(abs(norm / sla.svdvals(materialize(op))[0] - 1.0), 1e-4)


class RestrictionNormTestCase(SimpleTestCase):
    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.lists(st.booleans(), min_size=8, max_size=8),
        st.lists(st.booleans(), min_size=8, max_size=8),
    )
    def test_product_restriction_never_increases_the_norm(self, master_seed, row_flags, col_flags):
        matrix = np.random.default_rng(master_seed).standard_normal((8, 8))
        rows, cols = np.flatnonzero(row_flags), np.flatnonzero(col_flags)
        restricted = sla.svdvals(materialize(restrict(matrix, rows, cols)))[0]
        self.assertLessEqual(restricted, sla.svdvals(matrix)[0] * (1 + 1e-12))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_nonnegative_edge_restriction_never_increases_the_norm(self, master_seed):
        rng = np.random.default_rng(master_seed)
        matrix = rng.uniform(0.0, 1.0, size=(8, 8))
        rows, cols = np.nonzero(rng.uniform(size=(8, 8)) < 0.5)
        restricted = sla.svdvals(materialize(restrict_entries(matrix, rows, cols)))[0]
        self.assertLessEqual(restricted, sla.svdvals(matrix)[0] * (1 + 1e-12))


class InfToTwoSandwichTestCase(SimpleTestCase):
    @settings(max_examples=200, deadline=None)
    @given(small_matrices)
    def test_spectral_norm_between_scaled_inf_to_2_norms(self, matrix):
        exact = inf_to_2_norm_exact(matrix)
        norm = sla.svdvals(matrix)[0]
        self.assertLessEqual(exact / np.sqrt(matrix.shape[1]), norm * (1 + 1e-9) + 1e-12)
        self.assertLessEqual(norm, exact * (1 + 1e-9) + 1e-12)
