import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar, Iterable, Iterator, Tuple

import numpy as np
import scipy.sparse as sp

from .conf import concentration_settings
from .exceptions import InvalidModel, SizeExceeded, UnsupportedGraph
from .spectral import LinearOp

logger = logging.getLogger(__name__)

# Rows whose largest edge probability exceeds this rate are sampled by direct
# comparison; sparser rows skip geometrically between candidate positions.
DIRECT_SAMPLING_RATE = 0.1

UNDIRECTED_STREAM = 0
DIRECTED_STREAM = 1

U64 = 1 << 64


@dataclass(frozen=True)
class SeedSpec:
    """
    Seed of one Monte Carlo trial.

    Every row of a sampled graph draws from its own Philox-4x64 stream: the
    128-bit key is ``master_seed | stream_index << 64`` and the 256-bit counter
    starts at ``row << 128 | tag << 192``. Rows are therefore independent of
    the order (or the thread) they are sampled in.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < U64:
            raise ValueError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}.")
        if not 0 <= int(self.stream_index) < U64:
            raise ValueError(f"stream_index must be an unsigned 64-bit integer, got {self.stream_index}.")

    @property
    def key(self) -> int:
        return int(self.master_seed) | (int(self.stream_index) << 64)

    def row_generator(self, row: int, tag: int = UNDIRECTED_STREAM) -> np.random.Generator:
        counter = (int(row) << 128) | (int(tag) << 192)
        return np.random.Generator(np.random.Philox(key=self.key, counter=counter))

    def generator(self, tag: int) -> np.random.Generator:
        """Stream for draws that are not tied to a graph row (start vectors, random matrices)."""
        return self.row_generator(U64 - 1, tag)


def _read_only(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.float64)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class ProbabilityModel(ABC):
    """
    Edge probabilities (p_ij) of an inhomogeneous Erdos-Renyi graph.

    The diagonal is always treated as zero: p_ii never produces a loop and
    never enters the expected adjacency.
    """

    n: int

    kind: ClassVar[str] = ""

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidModel(f"n must be a positive integer, got {self.n!r}.")
        object.__setattr__(self, "n", int(self.n))

    @abstractmethod
    def row_probabilities(self, row: int, cols: np.ndarray) -> np.ndarray:
        """p_ij for one row and an array of columns other than ``row``."""

    @abstractmethod
    def row_cap(self, row: int, directed: bool) -> float:
        """
        Upper bound on the probabilities of the row's candidate pairs.

        Candidates are the columns ``j > row`` for undirected sampling and every
        ``j != row`` for directed sampling.
        """

    @abstractmethod
    def expected_matvec(self, x: np.ndarray) -> np.ndarray:
        """(EA) x for a vector or a block of column vectors."""

    @abstractmethod
    def max_rate(self) -> float:
        pass

    @abstractmethod
    def params(self) -> dict:
        pass

    def max_expected_degree(self) -> float:
        return float(np.max(self.expected_matvec(np.ones(self.n))))

    def average_expected_degree(self) -> float:
        return float(np.mean(self.expected_matvec(np.ones(self.n))))

    def dense(self) -> np.ndarray:
        """Dense probability matrix with zero diagonal (small n only)."""
        limit = concentration_settings.EXPLICIT_MAX_N
        if self.n > limit:
            raise SizeExceeded(self.n, limit)
        cols = np.arange(self.n)
        matrix = np.zeros((self.n, self.n))
        for row in range(self.n):
            others = cols[cols != row]
            matrix[row, others] = self.row_probabilities(row, others)
        return matrix

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, **self.params()}


@dataclass(frozen=True, eq=False)
class UniformModel(ProbabilityModel):
    p: float

    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 <= self.p <= 1.0:
            raise InvalidModel(f"p must lie in [0, 1], got {self.p}.")
        object.__setattr__(self, "p", float(self.p))

    def row_probabilities(self, row, cols):
        return np.full(len(cols), self.p)

    def row_cap(self, row, directed):
        return self.p

    def expected_matvec(self, x):
        return self.p * (x.sum(axis=0) - x)

    def max_rate(self):
        return self.n * self.p if self.n > 1 else 0.0

    def max_expected_degree(self):
        return (self.n - 1) * self.p

    def params(self):
        return {"p": self.p}


@dataclass(frozen=True, eq=False)
class RankOneModel(ProbabilityModel):
    """p_ij = min(theta_i * theta_j, 1)."""

    theta: np.ndarray

    kind: ClassVar[str] = "rank_one"

    def __post_init__(self):
        super().__post_init__()
        theta = _read_only(self.theta)
        if theta.shape != (self.n,):
            raise InvalidModel(f"theta must have length {self.n}, got shape {theta.shape}.")
        if not np.all(np.isfinite(theta)) or np.any(theta < 0):
            raise InvalidModel("theta must be finite and nonnegative.")
        object.__setattr__(self, "theta", theta)

        suffix = np.zeros(self.n + 1)
        suffix[:-1] = np.maximum.accumulate(theta[::-1])[::-1]
        order = np.argsort(theta, kind="stable")
        object.__setattr__(self, "_suffix_max", suffix)
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_sorted", theta[order])

    def row_probabilities(self, row, cols):
        return np.minimum(self.theta[row] * self.theta[cols], 1.0)

    def _largest_other(self, row: int) -> float:
        if self.n < 2:
            return 0.0
        if self._order[-1] == row:
            return self._sorted[-2]
        return self._sorted[-1]

    def row_cap(self, row, directed):
        other = self._largest_other(row) if directed else self._suffix_max[row + 1]
        return min(self.theta[row] * other, 1.0)

    def expected_matvec(self, x):
        vector = x.ndim == 1
        block = x[:, None] if vector else x
        sorted_theta = self._sorted
        sorted_block = block[self._order]

        # Columns with theta_j >= 1 / theta_i are capped at probability one.
        with np.errstate(divide="ignore"):
            thresholds = np.where(self.theta > 0, 1.0 / np.where(self.theta > 0, self.theta, 1.0), np.inf)
        split = np.searchsorted(sorted_theta, thresholds, side="left")

        weighted = np.zeros((self.n + 1, block.shape[1]))
        weighted[1:] = np.cumsum(sorted_theta[:, None] * sorted_block, axis=0)
        plain = np.zeros((self.n + 1, block.shape[1]))
        plain[1:] = np.cumsum(sorted_block, axis=0)

        result = self.theta[:, None] * weighted[split] + (plain[-1] - plain[split])
        result -= np.minimum(self.theta**2, 1.0)[:, None] * block
        return result[:, 0] if vector else result

    def max_rate(self):
        if self.n < 2:
            return 0.0
        return self.n * min(self._sorted[-1] * self._sorted[-2], 1.0)

    def params(self):
        return {"theta": self.theta.tolist()}


@dataclass(frozen=True, eq=False)
class BlockTwoModel(ProbabilityModel):
    """
    Balanced two-block model: rate a/n inside each half, b/n across.

    Vertices ``0 .. n/2 - 1`` form the first block.
    """

    a: float
    b: float

    kind: ClassVar[str] = "block_two"

    def __post_init__(self):
        super().__post_init__()
        if self.n % 2:
            raise InvalidModel(f"The two-block model needs an even n, got {self.n}.")
        for name in ("a", "b"):
            value = getattr(self, name)
            if not 0.0 <= value <= self.n:
                raise InvalidModel(f"{name} must lie in [0, n], got {value}.")
            object.__setattr__(self, name, float(value))

    @property
    def half(self) -> int:
        return self.n // 2

    @property
    def within(self) -> float:
        return self.a / self.n

    @property
    def across(self) -> float:
        return self.b / self.n

    def row_probabilities(self, row, cols):
        same = (np.asarray(cols) < self.half) == (row < self.half)
        return np.where(same, self.within, self.across)

    def row_cap(self, row, directed):
        return max(self.within, self.across)

    def expected_matvec(self, x):
        h = self.half
        first = x[:h].sum(axis=0)
        second = x[h:].sum(axis=0)
        result = np.empty_like(x, dtype=np.float64)
        result[:h] = self.within * first + self.across * second
        result[h:] = self.across * first + self.within * second
        return result - self.within * x

    def max_rate(self):
        if self.half == 1:
            return self.b
        return max(self.a, self.b)

    def max_expected_degree(self):
        h = self.half
        return (h - 1) * self.within + h * self.across

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True, eq=False)
class ExplicitModel(ProbabilityModel):
    """Dense symmetric probability matrix; the diagonal is ignored."""

    P: np.ndarray

    kind: ClassVar[str] = "explicit"

    def __post_init__(self):
        super().__post_init__()
        limit = concentration_settings.EXPLICIT_MAX_N
        if self.n > limit:
            raise SizeExceeded(self.n, limit)
        matrix = np.array(self.P, dtype=np.float64)
        if matrix.shape != (self.n, self.n):
            raise InvalidModel(f"P must be {self.n}x{self.n}, got shape {matrix.shape}.")
        if not np.all(np.isfinite(matrix)) or matrix.min(initial=0.0) < 0 or matrix.max(initial=0.0) > 1:
            raise InvalidModel("Entries of P must lie in [0, 1].")
        if not np.array_equal(matrix, matrix.T):
            raise InvalidModel("P must be symmetric.")
        np.fill_diagonal(matrix, 0.0)
        object.__setattr__(self, "P", _read_only(matrix))

    def row_probabilities(self, row, cols):
        return self.P[row, cols]

    def row_cap(self, row, directed):
        values = self.P[row] if directed else self.P[row, row + 1:]
        return float(values.max(initial=0.0))

    def expected_matvec(self, x):
        return self.P @ x

    def max_rate(self):
        return self.n * float(self.P.max(initial=0.0))

    def max_expected_degree(self):
        return float(self.P.sum(axis=1).max())

    def dense(self):
        return np.array(self.P)

    def params(self):
        return {"P": self.P.tolist()}


def degree_profile_model(n: int, low: float = 7.0, high: float = 35.0,
                         high_fraction: float = 0.1) -> RankOneModel:
    """
    Rank-one model with two expected-degree levels.

    The first ``n - round(high_fraction * n)`` vertices get expected degree
    ``low`` and the rest ``high`` (up to the excluded loop term), through
    ``theta_i = e_i / sqrt(sum_j e_j)``.
    """
    if not 0.0 <= high_fraction <= 1.0:
        raise InvalidModel(f"high_fraction must lie in [0, 1], got {high_fraction}.")
    if low < 0 or high < 0:
        raise InvalidModel("Expected degrees must be nonnegative.")
    high_count = int(round(high_fraction * n))
    expected = np.concatenate([np.full(n - high_count, float(low)), np.full(high_count, float(high))])
    total = expected.sum()
    theta = expected / np.sqrt(total) if total > 0 else np.zeros(n)
    return RankOneModel(n=n, theta=theta)


MODEL_KINDS = {
    UniformModel.kind: UniformModel,
    RankOneModel.kind: RankOneModel,
    BlockTwoModel.kind: BlockTwoModel,
    ExplicitModel.kind: ExplicitModel,
}


def model_from_dict(data: dict) -> ProbabilityModel:
    data = dict(data)
    kind = data.pop("kind", None)
    try:
        if kind == "degree_profile":
            return degree_profile_model(**data)
        if kind not in MODEL_KINDS:
            raise InvalidModel(f"Unknown model kind {kind!r}.")
        return MODEL_KINDS[kind](**data)
    except TypeError as exc:
        raise InvalidModel(f"Bad parameters for model kind {kind!r}: {exc}") from exc


def max_rate(model: ProbabilityModel) -> float:
    """d = max over off-diagonal pairs of n * p_ij."""
    return float(model.max_rate())


def max_expected_degree(model: ProbabilityModel) -> float:
    return float(model.max_expected_degree())


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """
    Adjacency matrix with weights in (0, 1] stored as canonical CSR.

    Undirected graphs store both orientations of every edge and never a loop.
    """

    n: int
    adjacency: sp.csr_matrix
    directed: bool = False

    def __post_init__(self):
        matrix = sp.csr_matrix(self.adjacency, dtype=np.float64, copy=True)
        if matrix.shape != (self.n, self.n):
            raise UnsupportedGraph(f"Adjacency shape {matrix.shape} does not match n={self.n}.")
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        matrix.sort_indices()
        if matrix.nnz:
            if matrix.data.min() <= 0.0 or matrix.data.max() > 1.0:
                raise UnsupportedGraph("Edge weights must lie in (0, 1].")
            if np.any(matrix.diagonal()):
                raise UnsupportedGraph("Graphs with loops are not supported.")
            if not self.directed and abs(matrix - matrix.T).max() > 1e-12:
                raise UnsupportedGraph("Undirected adjacency must be symmetric.")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "directed", bool(self.directed))
        object.__setattr__(self, "adjacency", matrix)

    @classmethod
    def empty(cls, n: int, directed: bool = False) -> "SparseGraph":
        return cls(n, sp.csr_matrix((n, n)), directed)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple], directed: bool = False) -> "SparseGraph":
        """
        Build a graph from ``(i, j)`` or ``(i, j, w)`` tuples.

        An undirected edge is listed once, in either orientation.
        """
        rows, cols, weights = [], [], []
        for edge in edges:
            i, j = int(edge[0]), int(edge[1])
            rows.append(i)
            cols.append(j)
            weights.append(float(edge[2]) if len(edge) > 2 else 1.0)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)

        if rows.size:
            if min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n:
                raise UnsupportedGraph(f"Edge endpoint outside [0, {n}).")
            if np.any(rows == cols):
                raise UnsupportedGraph("Graphs with loops are not supported.")
        if not directed:
            rows, cols = np.minimum(rows, cols), np.maximum(rows, cols)
        if np.unique(rows * n + cols).size != rows.size:
            raise UnsupportedGraph("Duplicate edges are not supported.")
        if not directed:
            rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
            weights = np.concatenate([weights, weights])
        return cls(n, sp.csr_matrix((weights, (rows, cols)), shape=(n, n)), directed)

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        """(i, j, w) triples, i < j for undirected graphs, in row-major order."""
        matrix = self.adjacency if self.directed else sp.triu(self.adjacency, k=1, format="csr")
        coo = matrix.tocoo()
        for i, j, w in zip(coo.row, coo.col, coo.data):
            yield int(i), int(j), float(w)

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz if self.directed else self.adjacency.nnz // 2

    @property
    def weighted(self) -> bool:
        return bool(np.any(self.adjacency.data != 1.0))

    def to_dense(self) -> np.ndarray:
        return self.adjacency.toarray()

    def operator(self) -> LinearOp:
        return LinearOp.from_matrix(self.adjacency, symmetric=not self.directed)

    def upper_triangle(self) -> "SparseGraph":
        return SparseGraph(self.n, sp.triu(self.adjacency, k=1, format="csr"), directed=True)

    def lower_triangle(self) -> "SparseGraph":
        return SparseGraph(self.n, sp.tril(self.adjacency, k=-1, format="csr"), directed=True)

    def transpose(self) -> "SparseGraph":
        return SparseGraph(self.n, self.adjacency.T.tocsr(), self.directed)


def _geometric_positions(rng: np.random.Generator, rate: float, length: int) -> np.ndarray:
    """Positions in [0, length) of the successes of independent Bernoulli(rate) trials."""
    chunks = []
    position = -1
    expected = length * rate
    size = int(expected + 4.0 * np.sqrt(expected) + 16)
    while True:
        candidates = position + np.cumsum(rng.geometric(rate, size=size))
        inside = candidates[candidates < length]
        chunks.append(inside)
        if inside.size < size:
            break
        position = int(candidates[-1])
    return np.concatenate(chunks)


def _sample(model: ProbabilityModel, seed: SeedSpec, directed: bool) -> SparseGraph:
    n = model.n
    tag = DIRECTED_STREAM if directed else UNDIRECTED_STREAM
    rows, cols = [], []
    for row in range(n):
        length = n - 1 if directed else n - row - 1
        if length <= 0:
            continue
        rate = model.row_cap(row, directed)
        if rate <= 0.0:
            continue
        rng = seed.row_generator(row, tag)
        if rate > DIRECT_SAMPLING_RATE:
            positions = np.arange(length)
            draws = rng.random(length)
        else:
            positions = _geometric_positions(rng, rate, length)
            draws = rng.random(positions.size) * rate
        if directed:
            targets = positions + (positions >= row)
        else:
            targets = positions + row + 1
        if targets.size:
            targets = targets[draws < model.row_probabilities(row, targets)]
        rows.append(np.full(targets.size, row, dtype=np.int64))
        cols.append(targets)

    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    if not directed:
        rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
    adjacency = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    logger.debug("Sampled %s graph on %d vertices with %d stored entries.",
                 "directed" if directed else "undirected", n, rows.size)
    return SparseGraph(n, adjacency, directed)


def sample(model: ProbabilityModel, seed: SeedSpec) -> SparseGraph:
    """Undirected sample: the upper triangle is drawn and mirrored."""
    return _sample(model, seed, directed=False)


def sample_directed(model: ProbabilityModel, seed: SeedSpec) -> SparseGraph:
    return _sample(model, seed, directed=True)


def expected_adjacency(model: ProbabilityModel) -> LinearOp:
    return LinearOp((model.n, model.n), model.expected_matvec, symmetric=True)


def triangular_expectation(model: ProbabilityModel, upper: bool = True) -> LinearOp:
    """Expectation of the strictly upper (or lower) triangular half of an undirected sample."""
    dense = model.dense()
    half = np.triu(dense, k=1) if upper else np.tril(dense, k=-1)
    return LinearOp.from_matrix(half, symmetric=False)
