import logging
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .conf import concentration_settings
from .exceptions import (
    DimensionMismatch,
    EntryOutOfRange,
    NoConvergence,
    SizeExceeded,
    WidthExceeded,
)

logger = logging.getLogger(__name__)

# Below this size eigenpairs are taken from a dense symmetric solve.
DENSE_EIGEN_LIMIT = 32

Block = Tuple[np.ndarray, np.ndarray]


class LinearOp(LinearOperator):
    """
    Matrix-free real operator with an explicit symmetry flag.

    ``apply`` and ``apply_transpose`` act on vectors of shape ``(cols,)`` and,
    column by column, on blocks of shape ``(cols, k)``.
    """

    def __init__(
        self,
        shape: Tuple[int, int],
        apply: Callable[[np.ndarray], np.ndarray],
        apply_transpose: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        symmetric: bool = False,
    ):
        super().__init__(dtype=np.dtype(np.float64), shape=(int(shape[0]), int(shape[1])))
        if apply_transpose is None:
            if not symmetric:
                raise ValueError("A non-symmetric operator needs apply_transpose.")
            apply_transpose = apply
        self._forward = apply
        self._backward = apply_transpose
        self.symmetric = bool(symmetric)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.shape

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self._forward(np.asarray(x, dtype=np.float64))

    def apply_transpose(self, x: np.ndarray) -> np.ndarray:
        return self._backward(np.asarray(x, dtype=np.float64))

    def _matvec(self, x):
        return self.apply(np.ravel(x))

    def _rmatvec(self, x):
        return self.apply_transpose(np.ravel(x))

    def _matmat(self, X):
        return self.apply(X)

    def _rmatmat(self, X):
        return self.apply_transpose(X)

    def _adjoint(self):
        return LinearOp(
            (self.shape[1], self.shape[0]), self._backward, self._forward, self.symmetric
        )

    _transpose = _adjoint

    @classmethod
    def from_matrix(cls, matrix, symmetric: Optional[bool] = None) -> "LinearOp":
        if sp.issparse(matrix):
            forward = sp.csr_matrix(matrix, dtype=np.float64)
            backward = forward.T.tocsr()
            if symmetric is None:
                symmetric = forward.shape[0] == forward.shape[1] and (forward != backward).nnz == 0
        else:
            forward = np.asarray(matrix, dtype=np.float64)
            if forward.ndim != 2:
                raise ValueError("Expected a two-dimensional matrix.")
            backward = forward.T
            if symmetric is None:
                symmetric = forward.shape[0] == forward.shape[1] and np.array_equal(forward, backward)
        return cls(forward.shape, lambda x: forward @ x, lambda x: backward @ x, symmetric)


def as_op(operator) -> LinearOp:
    """
    Wrap dense arrays, sparse matrices and scipy operators as a LinearOp.
    """
    if isinstance(operator, LinearOp):
        return operator
    if isinstance(operator, LinearOperator):
        adjoint = operator.H
        return LinearOp(operator.shape, lambda x: operator @ x, lambda x: adjoint @ x)
    return LinearOp.from_matrix(operator)


def identity(n: int, scale: float = 1.0) -> LinearOp:
    return LinearOp((n, n), lambda x: scale * x, symmetric=True)


def _scale_rows(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    if x.ndim == 2:
        return weights[:, None] * x
    return weights * x


def diagonal(values: Sequence[float]) -> LinearOp:
    values = np.asarray(values, dtype=np.float64)
    return LinearOp((values.size, values.size), lambda x: _scale_rows(values, x), symmetric=True)


def rank_one_apply(u: np.ndarray, v: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply u v^T to a vector or a block of vectors."""
    return np.multiply.outer(u, v @ x)


def materialize(operator) -> np.ndarray:
    """Dense matrix of a (small) operator."""
    op = as_op(operator)
    return np.asarray(op.apply(np.eye(op.shape[1])), dtype=np.float64)


def compose_difference(a, b) -> LinearOp:
    """Operator for ``a - b``."""
    a, b = as_op(a), as_op(b)
    if a.shape != b.shape:
        raise DimensionMismatch(a.shape, b.shape)
    return LinearOp(
        a.shape,
        lambda x: a.apply(x) - b.apply(x),
        lambda x: a.apply_transpose(x) - b.apply_transpose(x),
        a.symmetric and b.symmetric,
    )


def _index_mask(indices, size: int) -> np.ndarray:
    mask = np.zeros(size, dtype=np.float64)
    if indices is None:
        mask[:] = 1.0
    else:
        mask[np.asarray(indices, dtype=np.int64)] = 1.0
    return mask


def restrict(operator, rows=None, cols=None) -> LinearOp:
    """
    Restriction of an operator to the product set ``rows x cols``.

    Entries outside the block are zero; ``None`` keeps every index.
    """
    op = as_op(operator)
    row_mask = _index_mask(rows, op.shape[0])
    col_mask = _index_mask(cols, op.shape[1])
    return LinearOp(
        op.shape,
        lambda x: _scale_rows(row_mask, op.apply(_scale_rows(col_mask, x))),
        lambda x: _scale_rows(col_mask, op.apply_transpose(_scale_rows(row_mask, x))),
        op.symmetric and np.array_equal(row_mask, col_mask),
    )


def restrict_blocks(operator, blocks: Iterable[Block]) -> LinearOp:
    """
    Restriction to a union of pairwise disjoint product blocks.
    """
    op = as_op(operator)
    pieces = [restrict(op, rows, cols) for rows, cols in blocks if len(rows) and len(cols)]

    def forward(x):
        out = np.zeros((op.shape[0],) + x.shape[1:])
        for piece in pieces:
            out += piece.apply(x)
        return out

    def backward(x):
        out = np.zeros((op.shape[1],) + x.shape[1:])
        for piece in pieces:
            out += piece.apply_transpose(x)
        return out

    return LinearOp(op.shape, forward, backward)


def restrict_entries(matrix, rows: Sequence[int], cols: Sequence[int]) -> LinearOp:
    """
    Edge-mask restriction of an explicit matrix to the listed ``(row, col)`` pairs.
    """
    matrix = sp.csr_matrix(matrix, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    mask = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=matrix.shape)
    mask.data[:] = 1.0
    return LinearOp.from_matrix(matrix.multiply(mask).tocsr(), symmetric=False)


def spectral_norm(operator, tol: Optional[float] = None, max_iter: Optional[int] = None,
                  seed: int = 0) -> float:
    """
    Largest singular value by power iteration on ``op^T op``.

    Converged once the Rayleigh quotient ``rho = |op x|^2`` changes by less
    than ``tol * rho`` for three consecutive iterations and the residual
    ``|op^T op x - rho x|`` is at most ``sqrt(tol) * rho``. The start vector
    is a standard normal draw from ``seed``.

    Raises:
        NoConvergence: carries the last estimate in ``estimate``.
    """
    op = as_op(operator)
    tol = concentration_settings.POWER_TOL if tol is None else tol
    max_iter = concentration_settings.POWER_MAX_ITER if max_iter is None else max_iter
    if tol <= 0:
        raise ValueError("tol must be positive.")
    if 0 in op.shape:
        return 0.0

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.shape[1])
    x /= np.linalg.norm(x)

    rho = 0.0
    previous = None
    streak = 0
    for iteration in range(1, max_iter + 1):
        y = op.apply(x)
        rho = float(y @ y)
        if rho == 0.0:
            return 0.0
        z = op.apply_transpose(y)
        residual = float(np.linalg.norm(z - rho * x))
        if previous is not None and abs(rho - previous) <= tol * rho:
            streak += 1
        else:
            streak = 0
        if streak >= 3 and residual <= np.sqrt(tol) * rho:
            logger.debug("Power iteration converged after %d steps (norm %.6g).", iteration, np.sqrt(rho))
            return float(np.sqrt(rho))
        previous = rho
        x = z / np.linalg.norm(z)

    raise NoConvergence(max_iter, estimate=float(np.sqrt(rho)))


def top_k_eigs(operator, k: int, tol: Optional[float] = None, seed: int = 0,
               which: str = "LA") -> List[Tuple[float, np.ndarray]]:
    """
    k eigenpairs of a symmetric operator.

    Args:
        which: "LA" largest algebraic, "SA" smallest algebraic, "LM" largest magnitude.

    Returns:
        (eigenvalue, unit eigenvector) pairs, most extreme first.
    """
    op = as_op(operator)
    tol = concentration_settings.EIGEN_TOL if tol is None else tol
    if not op.symmetric:
        raise ValueError("top_k_eigs needs a symmetric operator.")
    n = op.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}.")
    if which not in ("LA", "SA", "LM"):
        raise ValueError(f"Unknown eigenvalue selection '{which}'.")

    if n <= DENSE_EIGEN_LIMIT or k >= n - 1:
        matrix = materialize(op)
        values, vectors = sla.eigh((matrix + matrix.T) / 2)
    else:
        v0 = np.random.default_rng(seed).standard_normal(n)
        try:
            values, vectors = eigsh(op, k=k, which=which, v0=v0, tol=0)
        except ArpackNoConvergence as exc:
            raise NoConvergence(n * 10) from exc

    if which == "LA":
        order = np.argsort(-values, kind="stable")
    elif which == "SA":
        order = np.argsort(values, kind="stable")
    else:
        order = np.argsort(-np.abs(values), kind="stable")
    order = order[:k]
    values = values[order]
    vectors = vectors[:, order]

    residuals = np.linalg.norm(op.apply(vectors) - vectors * values, axis=0)
    if np.any(residuals > tol * np.maximum(1.0, np.abs(values))):
        logger.warning("Eigenpair residuals %s exceed tolerance %.1e.", residuals, tol)
        raise NoConvergence(n * 10)
    return [(float(values[i]), vectors[:, i].copy()) for i in range(k)]


def second_smallest_eigenpair(laplacian_op, kernel: np.ndarray, tol: Optional[float] = None,
                              seed: int = 0) -> Tuple[float, np.ndarray]:
    """
    Second smallest eigenpair of an operator with spectrum in [0, 2] and known kernel vector.

    Runs the largest-eigenvalue solver on ``2I - L`` with the kernel direction deflated.
    """
    op = as_op(laplacian_op)
    n = op.shape[0]
    u = np.asarray(kernel, dtype=np.float64)
    u = u / np.linalg.norm(u)
    shifted = LinearOp(
        (n, n),
        lambda x: 2.0 * x - op.apply(x) - 2.0 * rank_one_apply(u, u, x),
        symmetric=True,
    )
    (value, vector), = top_k_eigs(shifted, 1, tol=tol, seed=seed, which="LA")
    return 2.0 - value, vector


def full_spectrum(matrix) -> np.ndarray:
    """
    All eigenvalues of a dense symmetric matrix, ascending.

    LAPACK ``syev``: Householder tridiagonalization followed by implicit QL/QR.
    """
    if isinstance(matrix, LinearOperator):
        matrix = materialize(matrix)
    elif sp.issparse(matrix):
        matrix = matrix.toarray()
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("full_spectrum needs a square matrix.")
    n = matrix.shape[0]
    limit = concentration_settings.FULL_SPECTRUM_MAX_N
    if n > limit:
        raise SizeExceeded(n, limit)
    if n == 0:
        return np.empty(0)
    scale = max(1.0, float(np.abs(matrix).max()))
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("full_spectrum needs a symmetric matrix.")
    return sla.eigvalsh(matrix, driver="ev")


def _dense(matrix) -> np.ndarray:
    if sp.issparse(matrix):
        matrix = matrix.toarray()
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    if matrix.ndim != 2:
        raise ValueError("Expected a matrix.")
    return matrix


def inf_to_2_norm_exact(matrix) -> float:
    """
    max of |Bx|_2 over sign vectors x, by enumeration of half the cube.
    """
    B = _dense(matrix)
    m = B.shape[1]
    limit = concentration_settings.EXACT_SIGN_MAX_WIDTH
    if m > limit:
        raise WidthExceeded(m, limit)
    if m == 0:
        return 0.0

    free = m - 1
    total = 1 << free
    chunk = 1 << min(free, 16)
    powers = np.arange(free, dtype=np.int64)
    best = 0.0
    for start in range(0, total, chunk):
        index = np.arange(start, min(start + chunk, total), dtype=np.int64)
        signs = np.ones((index.size, m))
        signs[:, :free] = 1 - 2 * ((index[:, None] >> powers) & 1)
        values = B @ signs.T
        best = max(best, float(np.max(np.einsum("ij,ij->j", values, values))))
    return float(np.sqrt(best))


def _local_sign_search(B: np.ndarray, x: np.ndarray, column_sq: np.ndarray) -> float:
    x = x.astype(np.float64).copy()
    y = B @ x
    for _ in range(100 * B.shape[1]):
        gains = 4.0 * column_sq - 4.0 * x * (B.T @ y)
        j = int(np.argmax(gains))
        if gains[j] <= 1e-12 * max(1.0, float(y @ y)):
            break
        y -= 2.0 * x[j] * B[:, j]
        x[j] = -x[j]
    return float(np.linalg.norm(y))


def inf_to_2_norm_lower(matrix, trials: int, seed: int = 0) -> float:
    """
    Lower bound on the infinity-to-2 norm.

    Starts from the sign pattern of the top right singular vector and from
    ``trials`` random sign vectors, each improved by single-coordinate flips.
    When ``trials`` covers the half cube the value is exact.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1.")
    B = _dense(matrix)
    m = B.shape[1]
    if m == 0 or not np.any(B):
        return 0.0
    if m <= concentration_settings.EXACT_SIGN_MAX_WIDTH and trials >= 1 << (m - 1):
        return inf_to_2_norm_exact(B)

    rng = np.random.default_rng(seed)
    column_sq = np.einsum("ij,ij->j", B, B)
    _, _, vt = sla.svd(B, full_matrices=False)
    starts = [np.where(vt[0] >= 0, 1.0, -1.0)]
    starts.extend(rng.choice([-1.0, 1.0], size=m) for _ in range(trials))
    return max(_local_sign_search(B, start, column_sq) for start in starts)


def l1_operator_bound(matrix) -> float:
    """sqrt(max row l1 norm * max column l1 norm), an upper bound on the spectral norm."""
    if isinstance(matrix, LinearOperator):
        matrix = materialize(matrix)
    if sp.issparse(matrix):
        absolute = abs(sp.csr_matrix(matrix, dtype=np.float64))
        row_sums = np.asarray(absolute.sum(axis=1)).ravel()
        col_sums = np.asarray(absolute.sum(axis=0)).ravel()
    else:
        absolute = np.abs(_dense(matrix))
        row_sums = absolute.sum(axis=1)
        col_sums = absolute.sum(axis=0)
    if row_sums.size == 0 or col_sums.size == 0:
        return 0.0
    return float(np.sqrt(row_sums.max() * col_sums.max()))


def l2_sparsity_bound(matrix) -> float:
    """
    sqrt(max row support size * max column l2 norm squared) for entries in [0, 1].

    Raises:
        EntryOutOfRange: an entry lies outside [0, 1].
    """
    if sp.issparse(matrix):
        matrix = sp.csr_matrix(matrix, dtype=np.float64)
        matrix.eliminate_zeros()
        values = matrix.data
        support = np.diff(matrix.indptr)
        col_sq = np.asarray(matrix.multiply(matrix).sum(axis=0)).ravel()
    else:
        matrix = _dense(matrix)
        values = matrix.ravel()
        support = np.count_nonzero(matrix, axis=1)
        col_sq = np.einsum("ij,ij->j", matrix, matrix)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise EntryOutOfRange("l2_sparsity_bound needs entries in [0, 1].")
    if support.size == 0 or col_sq.size == 0:
        return 0.0
    return float(np.sqrt(support.max() * col_sq.max()))
