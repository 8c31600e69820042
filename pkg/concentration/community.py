import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import InvalidRates, LengthMismatch, ZeroDegree, ZeroGap
from .graph_model import BlockTwoModel, SeedSpec, SparseGraph, sample
from .regularize import (
    average_degree,
    expected_laplacian,
    laplacian,
    laplacian_kernel,
    tau_shift,
)
from .spectral import LinearOp, compose_difference, identity, second_smallest_eigenpair, spectral_norm, top_k_eigs

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CommunityLabels:
    """Vertex labels in {+1, -1}."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("Community labels must be a vector of +1 and -1.")
        labels = labels.astype(np.int8)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.size

    @classmethod
    def from_signs(cls, vector: np.ndarray) -> "CommunityLabels":
        """Entrywise signs; zero entries get +1."""
        return cls(np.where(np.asarray(vector) >= 0, 1, -1))

    @classmethod
    def balanced(cls, n: int) -> "CommunityLabels":
        half = n // 2
        return cls(np.concatenate([np.ones(half), -np.ones(n - half)]))


def sbm_instance(n: int, a: float, b: float, seed: SeedSpec) -> Tuple[SparseGraph, CommunityLabels]:
    """
    Two balanced communities with rates a/n inside and b/n across.

    The first n/2 vertices carry label +1.
    """
    if n < 2 or n % 2:
        raise InvalidRates(f"n must be even and at least 2, got {n}.")
    if not 0 <= b <= a <= n:
        raise InvalidRates(f"Rates must satisfy 0 <= b <= a <= n, got a={a}, b={b}, n={n}.")
    model = BlockTwoModel(n=n, a=a, b=b)
    return sample(model, seed), CommunityLabels.balanced(n)


@dataclass
class Partition:
    labels: CommunityLabels
    eigenvalue: float
    eigenvector: np.ndarray
    tau: float


def spectral_partition(g: SparseGraph, tau: Optional[float] = None, seed: int = 0,
                       tol: Optional[float] = None) -> Partition:
    """
    Signs of the second eigenvector of L(A_tau).

    ``tau`` defaults to the average degree of ``g``.
    """
    tau = average_degree(g) if tau is None else float(tau)
    shifted = tau_shift(g, tau)
    value, vector = second_smallest_eigenpair(laplacian(shifted), laplacian_kernel(shifted), tol=tol, seed=seed)
    return Partition(CommunityLabels.from_signs(vector), value, vector, tau)


def detect(g: SparseGraph, tau: Optional[float] = None, seed: int = 0) -> CommunityLabels:
    return spectral_partition(g, tau, seed=seed).labels


def misclassification(estimate: CommunityLabels, truth: CommunityLabels) -> float:
    """Fraction of disagreeing labels after the better of the two global flips."""
    if len(estimate) != len(truth):
        raise LengthMismatch(len(estimate), len(truth))
    if not len(truth):
        return 0.0
    wrong = float(np.mean(estimate.labels != truth.labels))
    return min(wrong, 1.0 - wrong)


def davis_kahan_bound(norm_diff: float, spectral_gap: float) -> float:
    if not spectral_gap > 0:
        raise ZeroGap(f"Davis-Kahan needs a positive spectral gap, got {spectral_gap}.")
    return 2.0 * norm_diff / spectral_gap


@dataclass
class ExpectedEigvec:
    """
    Second eigenpair of L(EA_tau) for the two-block model.

    ``rest`` is the eigenvalue of the remaining n - 2 directions.
    """

    vector: np.ndarray
    eigenvalue: float
    rest: float
    gap: float

    @property
    def degenerate(self) -> bool:
        return not self.gap > 0


def expected_laplacian_eigvec(model: BlockTwoModel, tau: float) -> ExpectedEigvec:
    """
    Closed form for L(EA_tau): eigenvalues 0 (constant vector), 1 - mu2 / dbar
    (block sign vector) and 1 + (a/n) / dbar on the rest, with
    dbar = (h - 1) a/n + h b/n + tau and mu2 = h (a - b)/n - a/n.
    """
    if not isinstance(model, BlockTwoModel):
        raise TypeError("expected_laplacian_eigvec needs a two-block model.")
    n, h = model.n, model.half
    expected_degree = (h - 1) * model.within + h * model.across + tau
    if not expected_degree > 0:
        raise ZeroDegree(0)
    mu2 = h * (model.within - model.across) - model.within
    eigenvalue = 1.0 - mu2 / expected_degree
    rest = 1.0 + model.within / expected_degree
    gap = min(eigenvalue, rest - eigenvalue)
    vector = np.concatenate([np.ones(h), -np.ones(n - h)]) / np.sqrt(n)
    return ExpectedEigvec(vector, eigenvalue, rest, gap)


@dataclass
class LaplacianGaps:
    eigenvalues: np.ndarray
    gap: float


def laplacian_gaps(op: LinearOp, seed: int = 0, tol: Optional[float] = None) -> LaplacianGaps:
    """Three smallest eigenvalues of a Laplacian and the separation of the second one."""
    n = op.shape[0]
    shifted = compose_difference(identity(n, 2.0), op)
    pairs = top_k_eigs(shifted, min(3, n), tol=tol, seed=seed, which="LA")
    values = np.sort(np.array([2.0 - value for value, _ in pairs]))
    if values.size < 3:
        return LaplacianGaps(values, float(values[-1] - values[0]) if values.size > 1 else 0.0)
    return LaplacianGaps(values, float(min(values[1] - values[0], values[2] - values[1])))


@dataclass
class DavisKahanCheck:
    distance: float
    norm_diff: float
    gap: float
    gap_valid: bool
    predicted: Optional[float]

    @property
    def holds(self) -> Optional[bool]:
        if not self.gap_valid:
            return None
        return self.distance <= self.predicted

    def as_dict(self) -> dict:
        return {
            "distance": self.distance,
            "norm_diff": self.norm_diff,
            "gap": self.gap,
            "gap_valid": self.gap_valid,
            "predicted": self.predicted,
            "holds": self.holds,
        }


def davis_kahan_check(g: SparseGraph, model: BlockTwoModel, tau: float, seed: int = 0,
                      partition: Optional[Partition] = None) -> DavisKahanCheck:
    """
    Compare min over flips of |v2(L(A_tau)) + beta v2(L(EA_tau))| with 2 |X - Y| / delta.

    delta is the distance of both second eigenvalues to the remaining
    eigenvalues of both operators; the premise holds when it is positive and
    the second eigenvalues sit below the third ones.
    """
    if partition is None:
        partition = spectral_partition(g, tau, seed=seed)
    observed = laplacian(tau_shift(g, tau))
    expected = expected_laplacian(model, tau)
    closed = expected_laplacian_eigvec(model, tau)

    norm_diff = spectral_norm(compose_difference(observed, expected), seed=seed)
    x = partition.eigenvector / np.linalg.norm(partition.eigenvector)
    distance = float(min(np.linalg.norm(x + closed.vector), np.linalg.norm(x - closed.vector)))

    gaps = laplacian_gaps(observed, seed=seed)
    others = [gaps.eigenvalues[0], 0.0, closed.rest]
    if gaps.eigenvalues.size > 2:
        others.append(gaps.eigenvalues[2])
    seconds = [gaps.eigenvalues[1], closed.eigenvalue]
    gap = float(min(abs(s - o) for s in seconds for o in others))
    gap_valid = (
        gap > 0
        and not closed.degenerate
        and gaps.eigenvalues.size > 2
        and closed.eigenvalue < gaps.eigenvalues[2]
        and gaps.eigenvalues[1] < closed.rest
    )
    predicted = davis_kahan_bound(norm_diff, gap) if gap_valid else None
    if gap_valid and distance > predicted:
        logger.warning("Davis-Kahan inequality failed: %.6g > %.6g.", distance, predicted)
    return DavisKahanCheck(distance, norm_diff, gap, bool(gap_valid), predicted)
