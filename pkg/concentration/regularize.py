import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import UnsupportedGraph, ZeroDegree
from .graph_model import ProbabilityModel, SparseGraph, expected_adjacency, max_rate
from .spectral import LinearOp, compose_difference, rank_one_apply

logger = logging.getLogger(__name__)

SCHEME_KINDS = ("identity", "remove", "trim", "reweight", "tau")
CAP_RULES = ("fixed", "max_rate", "average_degree")


def degrees(g: SparseGraph) -> np.ndarray:
    """Row sums of the adjacency matrix (out-degrees for directed graphs)."""
    return np.asarray(g.adjacency.sum(axis=1), dtype=np.float64).ravel()


def average_degree(g: SparseGraph) -> float:
    return float(degrees(g).mean()) if g.n else 0.0


def max_row_l2_squared(g: SparseGraph) -> float:
    """max_i sum_j A_ij^2; equals the maximal degree for unweighted graphs."""
    squares = g.adjacency.multiply(g.adjacency)
    return float(np.asarray(squares.sum(axis=1)).max(initial=0.0))


def _check_cap(cap: float):
    if not cap > 0:
        raise ValueError(f"cap must be positive, got {cap}.")


def high_degree_set(g: SparseGraph, cap: float) -> np.ndarray:
    _check_cap(cap)
    return np.flatnonzero(degrees(g) > cap)


def remove_vertices(g: SparseGraph, vertices: Sequence[int]) -> SparseGraph:
    """Drop every entry with an endpoint in ``vertices``."""
    keep = np.ones(g.n)
    keep[np.asarray(vertices, dtype=np.int64)] = 0.0
    mask = sp.diags(keep, format="csr")
    return SparseGraph(g.n, mask @ g.adjacency @ mask, g.directed)


def trim_edges(g: SparseGraph, cap: float) -> SparseGraph:
    """
    Delete just enough edges at every vertex of degree above ``cap``.

    Overweight vertices are handled in decreasing order of their initial
    degree, lower index first on ties. Each one loses the edges whose other
    endpoint currently has the highest degree (higher index first on ties)
    until ``floor(cap)`` edges remain.
    """
    _check_cap(cap)
    if g.directed or g.weighted:
        raise UnsupportedGraph("trim_edges needs an undirected unweighted graph.")
    adjacency = g.adjacency
    initial = np.diff(adjacency.indptr)
    current = initial.copy()
    keep = int(np.floor(cap))
    removed = set()

    overweight = np.flatnonzero(initial > cap)
    for vertex in sorted(overweight, key=lambda v: (-initial[v], v)):
        vertex = int(vertex)
        if current[vertex] <= cap:
            continue
        row = adjacency.indices[adjacency.indptr[vertex]:adjacency.indptr[vertex + 1]]
        neighbours = [int(u) for u in row if (min(vertex, u), max(vertex, u)) not in removed]
        neighbours.sort(key=lambda u: (-current[u], -u))
        for u in neighbours[:current[vertex] - keep]:
            removed.add((min(vertex, u), max(vertex, u)))
            current[u] -= 1
        current[vertex] = keep

    if not removed:
        return g
    pairs = np.array(sorted(removed), dtype=np.int64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    deletions = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=adjacency.shape)
    logger.debug("Trimmed %d edges at %d vertices above cap %.4g.", len(removed), overweight.size, cap)
    return SparseGraph(g.n, adjacency - deletions, directed=False)


def reweight_factors(g: SparseGraph, cap: float) -> np.ndarray:
    """lambda_i = min(cap / d_i, 1), and 1 for isolated vertices."""
    _check_cap(cap)
    d = degrees(g)
    factors = np.ones(g.n)
    positive = d > 0
    factors[positive] = np.minimum(cap / d[positive], 1.0)
    return factors


def proportional_reweight(g: SparseGraph, cap: float) -> SparseGraph:
    """Entry (i, j) gets weight sqrt(lambda_i * lambda_j)."""
    if g.weighted:
        raise UnsupportedGraph("proportional_reweight needs an unweighted graph.")
    scale = sp.diags(np.sqrt(reweight_factors(g, cap)), format="csr")
    return SparseGraph(g.n, scale @ g.adjacency @ scale, g.directed)


@dataclass(frozen=True, eq=False)
class ShiftedGraph:
    """
    A_tau = A + (tau / n) 1 1^T, kept implicit.

    The diagonal carries tau / n as the formula says, so the shifted degree of
    every vertex is exactly d_i + tau.
    """

    base: SparseGraph
    tau: float

    @property
    def n(self) -> int:
        return self.base.n

    def degrees(self) -> np.ndarray:
        return degrees(self.base) + self.tau

    def operator(self) -> LinearOp:
        base = self.base.operator()
        ones = np.ones(self.n)
        shift = self.tau / self.n
        return LinearOp(
            (self.n, self.n),
            lambda x: base.apply(x) + shift * rank_one_apply(ones, ones, x),
            symmetric=True,
        )


def tau_shift(g: SparseGraph, tau: float) -> ShiftedGraph:
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}.")
    if g.directed:
        raise UnsupportedGraph("tau_shift needs an undirected graph.")
    return ShiftedGraph(g, float(tau))


def _scale_rows(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    return weights[:, None] * x if x.ndim == 2 else weights * x


def _normalized(adjacency: LinearOp, deg: np.ndarray) -> LinearOp:
    zero = np.flatnonzero(deg <= 0)
    if zero.size:
        raise ZeroDegree(int(zero[0]))
    scale = 1.0 / np.sqrt(deg)
    return LinearOp(
        adjacency.shape,
        lambda x: _scale_rows(scale, adjacency.apply(_scale_rows(scale, x))),
        symmetric=True,
    )


def _identity_minus(op: LinearOp) -> LinearOp:
    return LinearOp(op.shape, lambda x: x - op.apply(x), symmetric=True)


def shifted_degrees(x: Union[SparseGraph, ShiftedGraph]) -> np.ndarray:
    return x.degrees() if isinstance(x, ShiftedGraph) else degrees(x)


def laplacian(x: Union[SparseGraph, ShiftedGraph]) -> LinearOp:
    """
    I - D^{-1/2} A D^{-1/2}, matrix-free.

    Raises:
        ZeroDegree: some (shifted) degree is zero; use a tau shift first.
    """
    if isinstance(x, SparseGraph):
        if x.directed:
            raise UnsupportedGraph("The Laplacian needs an undirected graph.")
        return _identity_minus(_normalized(x.operator(), degrees(x)))
    return _identity_minus(_normalized(x.operator(), x.degrees()))


def laplacian_kernel(x: Union[SparseGraph, ShiftedGraph]) -> np.ndarray:
    """D^{1/2} 1, the eigenvector of eigenvalue zero."""
    return np.sqrt(shifted_degrees(x))


def _expected_shifted(model: ProbabilityModel, tau: float):
    expectation = expected_adjacency(model)
    ones = np.ones(model.n)
    shift = tau / model.n
    op = LinearOp(
        (model.n, model.n),
        lambda x: expectation.apply(x) + shift * rank_one_apply(ones, ones, x),
        symmetric=True,
    )
    return op, expectation.apply(ones) + tau


def expected_laplacian(model: ProbabilityModel, tau: float) -> LinearOp:
    """L(EA_tau) from the structured expectation operator."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}.")
    op, deg = _expected_shifted(model, tau)
    return _identity_minus(_normalized(op, deg))


def expected_laplacian_kernel(model: ProbabilityModel, tau: float) -> np.ndarray:
    _, deg = _expected_shifted(model, tau)
    return np.sqrt(deg)


class DeviationParts(NamedTuple):
    """
    L(A_tau) - L(EA_tau) = -(fluctuation + degree_mismatch), where

    fluctuation = D_tau^{-1/2} (A - EA) D_tau^{-1/2} and
    degree_mismatch = D_tau^{-1/2} EA_tau D_tau^{-1/2} - Dbar_tau^{-1/2} EA_tau Dbar_tau^{-1/2}.
    """

    fluctuation: LinearOp
    degree_mismatch: LinearOp


def laplacian_deviation_parts(g: SparseGraph, model: ProbabilityModel, tau: float) -> DeviationParts:
    shifted = tau_shift(g, tau)
    expected_op, expected_deg = _expected_shifted(model, tau)
    observed = _normalized(compose_difference(g.operator(), expected_adjacency(model)), shifted.degrees())
    mismatch = compose_difference(
        _normalized(expected_op, shifted.degrees()),
        _normalized(expected_op, expected_deg),
    )
    return DeviationParts(observed, mismatch)


@dataclass(frozen=True)
class RegularizationScheme:
    """
    One of the degree regularizations, with the cap either fixed or derived.

    ``cap_rule`` "max_rate" sets cap = cap_factor * max_rate(model) (so factor
    2 gives the usual 2d), "average_degree" sets cap = cap_factor times the
    average degree of the graph being regularized.
    """

    kind: str = "identity"
    cap: Optional[float] = None
    tau: float = 0.0
    cap_rule: str = "fixed"
    cap_factor: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"Unknown regularization scheme {self.kind!r}.")
        if self.cap_rule not in CAP_RULES:
            raise ValueError(f"Unknown cap rule {self.cap_rule!r}.")
        if self.uses_cap:
            if self.cap_rule == "fixed" and (self.cap is None or not self.cap > 0):
                raise ValueError(f"Scheme {self.kind!r} needs a positive cap.")
            if self.cap_rule != "fixed" and not self.cap_factor > 0:
                raise ValueError("cap_factor must be positive.")
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}.")

    @property
    def uses_cap(self) -> bool:
        return self.kind in ("remove", "trim", "reweight")

    def resolve_cap(self, g: SparseGraph, model: Optional[ProbabilityModel] = None) -> Optional[float]:
        if not self.uses_cap:
            return None
        if self.cap_rule == "fixed":
            return float(self.cap)
        if self.cap_rule == "max_rate":
            if model is None:
                raise ValueError("cap_rule 'max_rate' needs the probability model.")
            return self.cap_factor * max_rate(model)
        return self.cap_factor * average_degree(g)

    def apply(self, g: SparseGraph, model: Optional[ProbabilityModel] = None) -> Union[SparseGraph, ShiftedGraph]:
        if self.kind == "identity":
            return g
        if self.kind == "tau":
            return tau_shift(g, self.tau)
        if g.adjacency.nnz == 0:
            return g
        cap = self.resolve_cap(g, model)
        if self.kind == "remove":
            return remove_vertices(g, high_degree_set(g, cap))
        if self.kind == "trim":
            return trim_edges(g, cap)
        return proportional_reweight(g, cap)

    def to_dict(self) -> dict:
        data = {"scheme": self.kind}
        if self.uses_cap:
            data.update(cap=self.cap, cap_rule=self.cap_rule, cap_factor=self.cap_factor)
        if self.kind == "tau":
            data["tau"] = self.tau
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RegularizationScheme":
        return cls(
            kind=data.get("scheme", "identity"),
            cap=data.get("cap"),
            tau=data.get("tau", 0.0),
            cap_rule=data.get("cap_rule", "fixed"),
            cap_factor=data.get("cap_factor", 1.0),
        )
