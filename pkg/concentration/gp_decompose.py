import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg as sla

from .conf import concentration_settings
from .exceptions import CertificateViolation, NoConvergence, RowFilterEmpty, UnsupportedGraph
from .graph_model import SparseGraph
from .spectral import (
    as_op,
    inf_to_2_norm_exact,
    inf_to_2_norm_lower,
    materialize,
    restrict_entries,
    spectral_norm,
)

logger = logging.getLogger(__name__)

NORMAL = "N"
ROW_SPARSE = "R"
COLUMN_SPARSE = "C"
CLASSES = (NORMAL, ROW_SPARSE, COLUMN_SPARSE)
CLASS_CODES = {NORMAL: 0, ROW_SPARSE: 1, COLUMN_SPARSE: 2}
UNASSIGNED = -1
EXCEPTIONAL = 3

# Top singular pairs of matrices up to this (smaller) dimension use a full SVD.
SVD_LIMIT = 64

# Column fraction discarded by the submatrix selection inside each block.
BLOCK_DELTA = 0.25

Block = Tuple[np.ndarray, np.ndarray]


@dataclass
class PietschWeights:
    """
    Simplex weights mu with ``achieved_norm = |B D_mu^{-1/2}|``.

    ``inf_to_2`` is the infinity-to-2 norm value the factorization was checked
    against; it is exact when ``inf_to_2_exact`` is set and a lower bound otherwise.
    """

    mu: np.ndarray
    achieved_norm: float
    converged: bool
    iterations: int
    history: np.ndarray
    inf_to_2: float = 0.0
    inf_to_2_exact: bool = False

    @property
    def ratio(self) -> Optional[float]:
        if self.inf_to_2 <= 0:
            return None
        return self.achieved_norm / self.inf_to_2


@dataclass
class SubmatrixCertificate:
    columns: np.ndarray
    delta: float
    submatrix_norm: float
    bound: float
    weights: PietschWeights

    @property
    def min_columns(self) -> float:
        return (1.0 - self.delta) * self.weights.mu.size


def _dense(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    return matrix


def _top_singular_pair(matrix: np.ndarray, start: np.ndarray) -> Tuple[float, np.ndarray]:
    if min(matrix.shape) <= SVD_LIMIT:
        _, values, vt = sla.svd(matrix, full_matrices=False)
        return float(values[0]), vt[0]
    vector = start / np.linalg.norm(start)
    value = 0.0
    for _ in range(200):
        image = matrix.T @ (matrix @ vector)
        estimate = float(vector @ image)
        length = np.linalg.norm(image)
        if length == 0.0:
            return 0.0, vector
        vector = image / length
        converged = abs(estimate - value) <= 1e-10 * estimate
        value = estimate
        if converged:
            break
    return float(np.sqrt(value)), vector


def factorization_check(B, weights: PietschWeights, seed: int = 0) -> Tuple[float, bool]:
    """
    Evaluate |B|_{inf->2} <= achieved_norm.

    Uses the exact oracle up to GP_EXACT_CHECK_WIDTH columns and the
    randomized lower bound beyond.

    Raises:
        CertificateViolation: the inequality fails.
    """
    B = _dense(B)
    if B.shape[1] <= concentration_settings.GP_EXACT_CHECK_WIDTH:
        value, exact = inf_to_2_norm_exact(B), True
    else:
        value = inf_to_2_norm_lower(B, trials=concentration_settings.GP_LOWER_TRIALS, seed=seed)
        exact = False
    if value > weights.achieved_norm * (1.0 + 1e-12):
        raise CertificateViolation(
            f"|B|_inf->2 = {value:.12g} exceeds |B D_mu^-1/2| = {weights.achieved_norm:.12g}."
        )
    return value, exact


def gp_weights(B, tol: Optional[float] = None, max_iter: Optional[int] = None,
               seed: int = 0) -> PietschWeights:
    """
    Simplex weights approximately minimizing |B D_mu^{-1/2}|.

    Entropic mirror descent on f(mu)^2 = lambda_max(D_mu^{-1/2} B^T B D_mu^{-1/2})
    with step 1 / (sqrt(t) |g|_inf), where g_j = -f^2 v_j^2 / mu_j and v is the
    top right singular vector of B D_mu^{-1/2}. Stops early once the best value
    improved by less than ``tol`` (relative) over the last 50 iterations;
    otherwise the best iterate is returned with ``converged`` unset.

    Raises:
        CertificateViolation: the left factorization inequality failed.
    """
    B = _dense(B)
    if B.size == 0 or not np.any(B):
        raise ValueError("gp_weights needs a nonzero matrix.")
    tol = concentration_settings.GP_TOL if tol is None else tol
    max_iter = concentration_settings.GP_ITERATIONS if max_iter is None else max_iter
    m = B.shape[1]
    floor = np.finfo(np.float64).tiny

    mu = np.full(m, 1.0 / m)
    value, vector = _top_singular_pair(B / np.sqrt(mu), np.ones(m))
    best, best_mu = np.inf, mu.copy()
    history = []
    converged = False
    iterations = 0
    window = 50

    for step in range(1, max_iter + 1):
        iterations = step
        if value < best:
            best, best_mu = value, mu.copy()
        history.append(best)
        if step > window and history[-window - 1] - best <= tol * best:
            converged = True
            break

        gradient = -(value**2) * vector**2 / mu
        scale = float(np.max(np.abs(gradient)))
        if scale == 0.0:
            converged = True
            break
        mu = mu * np.exp(-gradient / (np.sqrt(step) * scale))
        mu = np.maximum(mu / mu.sum(), floor)
        mu /= mu.sum()
        value, vector = _top_singular_pair(B / np.sqrt(mu), vector)

    achieved = float(sla.svdvals(B / np.sqrt(best_mu))[0])
    weights = PietschWeights(
        mu=best_mu,
        achieved_norm=achieved,
        converged=converged,
        iterations=iterations,
        history=np.asarray(history),
    )
    weights.inf_to_2, weights.inf_to_2_exact = factorization_check(B, weights, seed=seed)
    if not converged:
        logger.debug("Mirror descent used all %d iterations (best %.6g).", iterations, achieved)
    return weights


def gp_submatrix(B, delta: float, weights: Optional[PietschWeights] = None,
                 seed: int = 0) -> SubmatrixCertificate:
    """
    Columns J = {j : mu_j <= 1 / (delta m)} with |B_J| <= achieved_norm / sqrt(delta m).

    Both |J| >= (1 - delta) m and the norm bound are asserted on every call.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}.")
    B = _dense(B)
    if weights is None:
        weights = gp_weights(B, seed=seed)
    m = B.shape[1]
    columns = np.flatnonzero(weights.mu <= 1.0 / (delta * m))
    if columns.size < (1.0 - delta) * m - 1e-9:
        raise CertificateViolation(f"Only {columns.size} of {m} columns kept at delta={delta}.")

    submatrix_norm = float(sla.svdvals(B[:, columns])[0]) if columns.size else 0.0
    bound = weights.achieved_norm / np.sqrt(delta * m)
    if submatrix_norm > bound * (1.0 + 1e-10):
        raise CertificateViolation(f"|B_J| = {submatrix_norm:.12g} exceeds {bound:.12g}.")
    return SubmatrixCertificate(columns, delta, submatrix_norm, bound, weights)


@dataclass
class RoundTrace:
    """Record of one pass over the current exceptional block."""

    index: int
    rows: np.ndarray
    cols: np.ndarray
    alpha: float
    light_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    light_cols: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    exceptional_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    exceptional_cols: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    overflow_rows: int = 0
    overflow_cols: int = 0
    gp_converged: List[bool] = field(default_factory=list)
    outcome: str = "split"

    @property
    def size(self) -> int:
        return int(self.rows.size)

    def to_dict(self) -> dict:
        return {
            "round": self.index,
            "size": self.size,
            "alpha": self.alpha,
            "rows": self.rows.tolist(),
            "cols": self.cols.tolist(),
            "light_rows": self.light_rows.tolist(),
            "light_cols": self.light_cols.tolist(),
            "exceptional_rows": self.exceptional_rows.tolist(),
            "exceptional_cols": self.exceptional_cols.tolist(),
            "overflow_rows": self.overflow_rows,
            "overflow_cols": self.overflow_cols,
            "gp_converged": self.gp_converged,
            "outcome": self.outcome,
        }


@dataclass
class BlockSplit:
    """Classes produced inside one block plus the next exceptional block."""

    normal: List[Block]
    row_sparse: List[Block]
    column_sparse: List[Block]
    exceptional_rows: np.ndarray
    exceptional_cols: np.ndarray
    trace: RoundTrace


def _minus(p: Block, q: Block) -> List[Block]:
    """P \\ Q for product sets, as at most two disjoint product blocks."""
    rows_p, cols_p = p
    rows_q, cols_q = q
    pieces = []
    outside = np.setdiff1d(rows_p, rows_q, assume_unique=True)
    if outside.size and cols_p.size:
        pieces.append((outside, cols_p))
    shared = np.intersect1d(rows_p, rows_q, assume_unique=True)
    remaining = np.setdiff1d(cols_p, cols_q, assume_unique=True)
    if shared.size and remaining.size:
        pieces.append((shared, remaining))
    return pieces


def _minus_all(pieces: List[Block], others: List[Block]) -> List[Block]:
    for other in others:
        pieces = [piece for p in pieces for piece in _minus(p, other)]
    return pieces


def _disjoint_union(blocks: List[Block]) -> List[Block]:
    result: List[Block] = []
    for block in blocks:
        if block[0].size and block[1].size:
            result.extend(_minus_all([block], result))
    return result


def _keep_heaviest(indices: np.ndarray, weights: np.ndarray, count: int) -> np.ndarray:
    order = np.lexsort((indices, -weights))
    return np.sort(indices[order[:count]])


def decompose_block(A: SparseGraph, EA, rows, cols, alpha: float, r: float, d: float,
                    round_index: int = 0, seed: int = 0) -> BlockSplit:
    """
    Split the block ``rows x cols`` into N, R and C pieces and an exceptional block.

    1. Light rows: at most 8 r alpha d ones inside the block.
    2. Submatrix selection (delta = 1/4) on (A - EA) restricted to light rows.
    3. Columns with at most 32 r ones in the heavy rows; every other column,
       and every column the selection dropped, is exceptional.
    4. The same on the transpose gives light columns and exceptional rows.
    5. N beats R beats C wherever pieces overlap.

    The exceptional block is cut down to a square of side at most m / 2 by
    keeping its heaviest rows and columns; the entries released that way go to N.

    Raises:
        RowFilterEmpty: no light row or no light column exists.
    """
    EA = as_op(EA)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    m = rows.size
    if cols.size != m:
        raise ValueError(f"decompose_block needs a square block, got {m}x{cols.size}.")
    trace = RoundTrace(round_index, rows, cols, float(alpha))

    block = A.adjacency[rows][:, cols].toarray()
    ones = block > 0
    row_ones = ones.sum(axis=1)
    col_ones = ones.sum(axis=0)
    light_limit = 8.0 * r * alpha * d
    sparse_limit = 32.0 * r

    light_rows_local = np.flatnonzero(row_ones <= light_limit)
    light_cols_local = np.flatnonzero(col_ones <= light_limit)
    trace.light_rows = rows[light_rows_local]
    trace.light_cols = cols[light_cols_local]
    if not light_rows_local.size or not light_cols_local.size:
        raise RowFilterEmpty(f"No light rows or columns in a block of size {m} (limit {light_limit:.4g}).")

    selector = np.zeros((A.n, m))
    selector[cols, np.arange(m)] = 1.0
    difference = block - np.asarray(EA.apply(selector))[rows]

    def select(matrix: np.ndarray) -> np.ndarray:
        if not np.any(matrix):
            return np.arange(matrix.shape[1])
        certificate = gp_submatrix(matrix, BLOCK_DELTA, seed=seed)
        trace.gp_converged.append(certificate.weights.converged)
        return certificate.columns

    heavy_rows_local = np.setdiff1d(np.arange(m), light_rows_local)
    heavy_cols_local = np.setdiff1d(np.arange(m), light_cols_local)

    # Column pass.
    selected_cols = select(difference[light_rows_local])
    sparse_cols = np.flatnonzero(ones[heavy_rows_local].sum(axis=0) <= sparse_limit)
    good_cols = np.intersect1d(selected_cols, sparse_cols)
    exceptional_cols_local = np.setdiff1d(np.arange(m), good_cols)

    # Row pass, on the transpose.
    selected_rows = select(difference[:, light_cols_local].T)
    sparse_rows = np.flatnonzero(ones[:, heavy_cols_local].sum(axis=1) <= sparse_limit)
    good_rows = np.intersect1d(selected_rows, sparse_rows)
    exceptional_rows_local = np.setdiff1d(np.arange(m), good_rows)

    side = min(exceptional_rows_local.size, exceptional_cols_local.size, m // 2)
    kept_rows_local = _keep_heaviest(exceptional_rows_local, row_ones[exceptional_rows_local], side)
    kept_cols_local = _keep_heaviest(exceptional_cols_local, col_ones[exceptional_cols_local], side)
    trace.overflow_rows = int(exceptional_rows_local.size - side)
    trace.overflow_cols = int(exceptional_cols_local.size - side)
    if max(exceptional_rows_local.size, exceptional_cols_local.size) > m // 2:
        logger.warning(
            "Round %d: exceptional block %dx%d cut to %d (block size %d).",
            round_index, exceptional_rows_local.size, exceptional_cols_local.size, side, m,
        )

    def product(row_local, col_local) -> Block:
        return rows[row_local], cols[col_local]

    good_rows_all = np.setdiff1d(np.arange(m), exceptional_rows_local)
    normal = _disjoint_union([
        product(light_rows_local, good_cols),
        product(good_rows_all, light_cols_local),
        product(np.setdiff1d(exceptional_rows_local, kept_rows_local), exceptional_cols_local),
        product(kept_rows_local, np.setdiff1d(exceptional_cols_local, kept_cols_local)),
    ])
    row_sparse = _minus_all([product(good_rows_all, heavy_cols_local)], normal)
    column_sparse = _minus_all([product(heavy_rows_local, good_cols)], normal + row_sparse)
    row_sparse = [b for b in row_sparse if b[0].size and b[1].size]
    column_sparse = [b for b in column_sparse if b[0].size and b[1].size]

    trace.exceptional_rows = rows[kept_rows_local]
    trace.exceptional_cols = cols[kept_cols_local]
    return BlockSplit(normal, row_sparse, column_sparse, trace.exceptional_rows, trace.exceptional_cols, trace)


def peel_degenerate_block(A: SparseGraph, rows, cols, alpha: float, r: float,
                          round_index: int = 0) -> BlockSplit:
    """
    Handle a block without light rows or columns.

    The whole block starts out exceptional. Rows with at most 32 r ones in the
    block go to R, then columns with at most 32 r ones in the remaining rows
    go to C. What is left stays exceptional; nothing goes to N.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    trace = RoundTrace(round_index, rows, cols, float(alpha), outcome="row_filter_empty")
    ones = A.adjacency[rows][:, cols].toarray() > 0
    sparse_limit = 32.0 * r

    sparse_rows = ones.sum(axis=1) <= sparse_limit
    heavy_rows = rows[~sparse_rows]
    sparse_cols = ones[~sparse_rows].sum(axis=0) <= sparse_limit

    row_sparse = [(rows[sparse_rows], cols)] if sparse_rows.any() and cols.size else []
    column_sparse = [(heavy_rows, cols[sparse_cols])] if heavy_rows.size and sparse_cols.any() else []
    if heavy_rows.size and not sparse_cols.all():
        trace.exceptional_rows = heavy_rows
        trace.exceptional_cols = cols[~sparse_cols]
    return BlockSplit([], row_sparse, column_sparse, trace.exceptional_rows, trace.exceptional_cols, trace)


@dataclass
class EdgeDecomposition:
    """
    Assignment of every ordered pair of [n] x [n] to N, R or C.

    ``blocks`` holds product blocks per class; the ``labels`` matrix is built
    from them (-1 where no block covers a pair). ``exceptional`` is the block
    a degenerate round could not split; its pairs are labeled ``E``.
    """

    n: int
    blocks: Dict[str, List[Block]]
    r: float
    d: float
    trace: List[RoundTrace] = field(default_factory=list)
    exceptional: Optional[Block] = None

    @classmethod
    def from_blocks(cls, n: int, blocks: Dict[str, List[Tuple]], r: float = 1.0,
                    d: float = 0.0) -> "EdgeDecomposition":
        normalized = {
            name: [
                (np.unique(np.asarray(rows, dtype=np.int64)), np.unique(np.asarray(cols, dtype=np.int64)))
                for rows, cols in blocks.get(name, [])
            ]
            for name in CLASSES
        }
        return cls(n, normalized, r, d)

    def blocks_of(self, name: str) -> List[Block]:
        return self.blocks.get(name, [])

    @cached_property
    def coverage(self) -> np.ndarray:
        counts = np.zeros((self.n, self.n), dtype=np.int32)
        for name in CLASSES:
            for rows, cols in self.blocks_of(name):
                counts[np.ix_(rows, cols)] += 1
        return counts

    @cached_property
    def labels(self) -> np.ndarray:
        labels = np.full((self.n, self.n), UNASSIGNED, dtype=np.int8)
        for name in reversed(CLASSES):
            for rows, cols in self.blocks_of(name):
                labels[np.ix_(rows, cols)] = CLASS_CODES[name]
        if self.exceptional is not None:
            labels[np.ix_(*self.exceptional)] = EXCEPTIONAL
        return labels

    @property
    def exceptional_pairs(self) -> int:
        if self.exceptional is None:
            return 0
        return int(self.exceptional[0].size * self.exceptional[1].size)

    def mask(self, name: str) -> np.ndarray:
        return self.labels == CLASS_CODES[name]

    def pairs(self):
        """(i, j, class) for every ordered pair, row-major."""
        names = {code: name for name, code in CLASS_CODES.items()}
        names[UNASSIGNED] = "?"
        names[EXCEPTIONAL] = "E"
        labels = self.labels
        for i in range(self.n):
            for j in range(self.n):
                yield i, j, names[int(labels[i, j])]

    def trace_dicts(self) -> List[dict]:
        return [entry.to_dict() for entry in self.trace]


def decompose(A: SparseGraph, EA, r: float, d: float, seed: int = 0) -> EdgeDecomposition:
    """
    Iterate decompose_block over halving exceptional blocks.

    Starts from the whole matrix with alpha = 1; afterwards alpha = sqrt(m / n)
    for the running block size m. Blocks of at most DECOMPOSE_MIN_BLOCK rows go
    to N whole. A block without light rows or columns is peeled into R and C
    and whatever remains is kept as the exceptional block, ending the rounds.
    """
    if not A.directed:
        raise UnsupportedGraph("decompose needs a directed graph; split undirected graphs into triangles.")
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}.")
    EA = as_op(EA)
    n = A.n
    min_block = concentration_settings.DECOMPOSE_MIN_BLOCK
    blocks: Dict[str, List[Block]] = {name: [] for name in CLASSES}
    trace: List[RoundTrace] = []
    seen_rows = np.zeros(n, dtype=bool)
    exceptional: Optional[Block] = None

    rows = cols = np.arange(n, dtype=np.int64)
    alpha = 1.0
    index = 0
    while rows.size:
        if rows.size <= min_block:
            blocks[NORMAL].append((rows, cols))
            trace.append(RoundTrace(index, rows, cols, alpha, outcome="small"))
            break
        degenerate = False
        try:
            split = decompose_block(A, EA, rows, cols, alpha, r, d, round_index=index, seed=seed)
        except RowFilterEmpty as exc:
            split = peel_degenerate_block(A, rows, cols, alpha, r, round_index=index)
            degenerate = True
            logger.info(
                "Round %d: %s Exceptional block %dx%d left after peeling.",
                index, exc, split.exceptional_rows.size, split.exceptional_cols.size,
            )

        round_rows = np.unique(np.concatenate([b[0] for b in split.row_sparse] or [np.empty(0, dtype=np.int64)]))
        if np.any(seen_rows[round_rows]):
            raise CertificateViolation(f"Round {index} reuses rows of an earlier R class.")
        seen_rows[round_rows] = True

        blocks[NORMAL].extend(split.normal)
        blocks[ROW_SPARSE].extend(split.row_sparse)
        blocks[COLUMN_SPARSE].extend(split.column_sparse)
        trace.append(split.trace)
        logger.debug(
            "Round %d: block %d, alpha %.4g, exceptional %dx%d.",
            index, rows.size, alpha, split.exceptional_rows.size, split.exceptional_cols.size,
        )

        rows, cols = split.exceptional_rows, split.exceptional_cols
        if degenerate:
            if rows.size:
                exceptional = (rows, cols)
            break
        alpha = float(np.sqrt(rows.size / n))
        index += 1

    return EdgeDecomposition(n, blocks, r, d, trace, exceptional)


@dataclass
class DecompositionReport:
    partition_ok: bool
    max_row_ones_r: int
    row_bound_ok: bool
    max_col_ones_c: int
    col_bound_ok: bool
    r_columns: int
    c_rows: int
    footprint_limit: Optional[float]
    footprint_ok: bool
    normal_norm: Optional[float]
    normal_ratio: Optional[float]
    normal_norm_converged: bool
    rounds: int
    exceptional_pairs: int

    @property
    def structural_ok(self) -> bool:
        return self.partition_ok and self.row_bound_ok and self.col_bound_ok

    def as_dict(self) -> dict:
        data = dict(self.__dict__)
        data["structural_ok"] = self.structural_ok
        return data


def verify_decomposition(A: SparseGraph, EA, dec: EdgeDecomposition, d: float, r: float,
                         slack: Optional[float] = None, seed: int = 0) -> DecompositionReport:
    """
    Check an edge decomposition.

    (a) every pair covered exactly once by N, R or C (pairs left in the
    exceptional block fail it); (b) rows of A_R and (c) columns of A_C
    carry at most 32 r ones; (d) R meets at most slack * n / d columns and C at
    most slack * n / d rows; (e) |(A - EA)_N| and its ratio to r^{3/2} sqrt(d).
    """
    slack = concentration_settings.DECOMPOSE_SLACK if slack is None else slack
    n = A.n
    if dec.n != n:
        raise ValueError(f"Decomposition of size {dec.n} does not match graph of size {n}.")
    ones = A.adjacency.toarray() > 0
    in_r = dec.mask(ROW_SPARSE)
    in_c = dec.mask(COLUMN_SPARSE)
    in_n = dec.mask(NORMAL)
    bound = 32.0 * r

    partition_ok = bool(np.all(dec.coverage == 1))
    max_row = int((ones & in_r).sum(axis=1).max(initial=0))
    max_col = int((ones & in_c).sum(axis=0).max(initial=0))
    r_columns = int(np.any(in_r, axis=0).sum())
    c_rows = int(np.any(in_c, axis=1).sum())
    if d > 0:
        footprint_limit = slack * n / d
        footprint_ok = r_columns <= footprint_limit and c_rows <= footprint_limit
    else:
        footprint_limit, footprint_ok = None, True
    if not footprint_ok:
        logger.warning("Decomposition footprint %d/%d exceeds %.4g.", r_columns, c_rows, footprint_limit)

    difference = A.adjacency.toarray() - materialize(EA)
    rows, cols = np.nonzero(in_n)
    converged = True
    try:
        norm = spectral_norm(restrict_entries(difference, rows, cols), seed=seed)
    except NoConvergence as exc:
        norm, converged = exc.estimate, False
    ratio = norm / (r**1.5 * np.sqrt(d)) if d > 0 and norm is not None else None

    return DecompositionReport(
        partition_ok=partition_ok,
        max_row_ones_r=max_row,
        row_bound_ok=max_row <= bound,
        max_col_ones_c=max_col,
        col_bound_ok=max_col <= bound,
        r_columns=r_columns,
        c_rows=c_rows,
        footprint_limit=footprint_limit,
        footprint_ok=bool(footprint_ok),
        normal_norm=norm,
        normal_ratio=ratio,
        normal_norm_converged=converged,
        rounds=len(dec.trace),
        exceptional_pairs=dec.exceptional_pairs,
    )
