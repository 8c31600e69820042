"""
Trial functions and report assembly behind the management commands.

Each ``*_trial`` function runs one Monte Carlo trial from its SeedSpec and
returns a flat dict of measurements. The ``summarize_*`` functions turn the
sorted trial list into per-cell summaries and flags.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np

from .community import davis_kahan_check, misclassification, sbm_instance, spectral_partition
from .conf import concentration_settings
from .exceptions import NoConvergence
from .gp_decompose import (
    EdgeDecomposition,
    decompose,
    gp_submatrix,
    gp_weights,
    verify_decomposition,
)
from .graph_model import (
    BlockTwoModel,
    ProbabilityModel,
    SeedSpec,
    SparseGraph,
    expected_adjacency,
    max_expected_degree,
    max_rate,
    sample,
    sample_directed,
    triangular_expectation,
)
from .regularize import (
    RegularizationScheme,
    average_degree,
    degrees,
    expected_laplacian,
    laplacian,
    laplacian_deviation_parts,
    max_row_l2_squared,
    tau_shift,
)
from .spectral import (
    compose_difference,
    full_spectrum,
    inf_to_2_norm_exact,
    inf_to_2_norm_lower,
    materialize,
    spectral_norm,
)
from .utilities import non_increasing, relative_spread, strictly_increasing, summarize

logger = logging.getLogger(__name__)

GP_STREAM = 2
SQRT_HALF_PI = math.sqrt(math.pi / 2)


def describe_model(model: ProbabilityModel) -> str:
    params = model.params()
    if model.kind == "uniform":
        return f"uniform(n={model.n},d={model.n * params['p']:.6g})"
    if model.kind == "block_two":
        return f"block_two(n={model.n},a={params['a']:.6g},b={params['b']:.6g})"
    return f"{model.kind}(n={model.n},d={max_rate(model):.6g})"


def describe_scheme(scheme: RegularizationScheme) -> str:
    if scheme.kind == "identity":
        return "identity"
    if scheme.kind == "tau":
        return f"tau({scheme.tau:.6g})"
    if scheme.cap_rule == "fixed":
        return f"{scheme.kind}(cap={scheme.cap:.6g})"
    return f"{scheme.kind}({scheme.cap_factor:.6g}*{scheme.cap_rule})"


def measured_norm(op, seed: int) -> Tuple[float, bool]:
    """Spectral norm and convergence flag; a non-converged run keeps its last estimate."""
    try:
        return spectral_norm(op, seed=seed), True
    except NoConvergence as exc:
        logger.warning("Power iteration did not converge; recording estimate %s.", exc.estimate)
        return exc.estimate, False


def _ratio(value: Optional[float], scale: float) -> Optional[float]:
    if value is None or not scale > 0:
        return None
    return value / scale


def _cells(trials: List[dict]) -> Dict[str, List[dict]]:
    cells = defaultdict(list)
    for trial in trials:
        cells[trial["cell"]].append(trial)
    return dict(cells)


# sample

def sample_trial(model: ProbabilityModel, directed: bool, seed: SeedSpec) -> Tuple[SparseGraph, dict]:
    g = sample_directed(model, seed) if directed else sample(model, seed)
    d = degrees(g)
    return g, {
        "cell": describe_model(model),
        "stream_index": seed.stream_index,
        "edges": g.num_edges,
        "average_degree": float(d.mean()),
        "max_degree": float(d.max(initial=0.0)),
        "max_rate": max_rate(model),
        "max_expected_degree": max_expected_degree(model),
    }


# spectrum

def spectrum_trial(g: SparseGraph, scheme: RegularizationScheme, model: Optional[ProbabilityModel],
                   stream_index: int, tail_threshold: Optional[float] = None) -> Tuple[dict, np.ndarray, np.ndarray]:
    """
    Full spectrum of one graph before and after regularization.

    The tail counts eigenvalues with |lambda| above ``tail_threshold``, by default
    2 sqrt(d) for the average expected degree d of the model (the sample's
    average degree when only a graph file is given).
    """
    before = full_spectrum(g.adjacency)
    regularized = scheme.apply(g, model)
    after = full_spectrum(materialize(regularized.operator()))
    if tail_threshold is None:
        rate = model.average_expected_degree() if model is not None else average_degree(g)
        tail_threshold = 2.0 * math.sqrt(rate)
    measurements = {
        "cell": describe_scheme(scheme),
        "stream_index": stream_index,
        "cap": scheme.resolve_cap(g, model) if scheme.uses_cap and g.adjacency.nnz else None,
        "max_before": float(before.max(initial=0.0)),
        "max_after": float(after.max(initial=0.0)),
        "max_abs_before": float(np.abs(before).max(initial=0.0)),
        "max_abs_after": float(np.abs(after).max(initial=0.0)),
        "tail_threshold": tail_threshold,
        "tail_before": int(np.count_nonzero(np.abs(before) > tail_threshold)),
        "tail_after": int(np.count_nonzero(np.abs(after) > tail_threshold)),
    }
    return measurements, before, after


def spectrum_histogram(before: np.ndarray, after: np.ndarray, bins: int) -> List[Tuple[float, float, int, int]]:
    """
    Histogram rows (left, right, count before, count after) over the common range.

    A degenerate range gives a single bin.
    """
    values = np.concatenate([before, after])
    if not values.size:
        return []
    low, high = float(values.min()), float(values.max())
    if low == high:
        return [(low, high, int(before.size), int(after.size))]
    counts_before, edges = np.histogram(before, bins=bins, range=(low, high))
    counts_after, _ = np.histogram(after, bins=bins, range=(low, high))
    return [
        (float(edges[k]), float(edges[k + 1]), int(counts_before[k]), int(counts_after[k]))
        for k in range(bins)
    ]


def summarize_spectrum(trials: List[dict]) -> Tuple[dict, dict]:
    summary = {
        "max_abs_before": summarize(t["max_abs_before"] for t in trials),
        "max_abs_after": summarize(t["max_abs_after"] for t in trials),
        "tail_before": summarize(t["tail_before"] for t in trials),
        "tail_after": summarize(t["tail_after"] for t in trials),
    }
    flags = {
        "max_eigenvalue_decreased": all(t["max_after"] < t["max_before"] for t in trials),
        "max_abs_eigenvalue_decreased": all(t["max_abs_after"] < t["max_abs_before"] for t in trials),
        "tail_count_decreased": all(t["tail_after"] < t["tail_before"] for t in trials),
    }
    return summary, flags


# concentration

def concentration_trial(model: ProbabilityModel, scheme: RegularizationScheme, seed: SeedSpec) -> dict:
    g = sample(model, seed)
    d = max_rate(model)
    expectation = expected_adjacency(model)
    regularized = scheme.apply(g, model)

    deviation, converged = measured_norm(compose_difference(regularized.operator(), expectation), seed.stream_index)
    raw_norm, raw_converged = measured_norm(g.operator(), seed.stream_index)
    max_degree = float(degrees(g).max(initial=0.0))
    d_prime = max(float(degrees(regularized).max(initial=0.0)), max_row_l2_squared(regularized))

    measurements = {
        "cell": f"{describe_model(model)}|{describe_scheme(scheme)}",
        "stream_index": seed.stream_index,
        "n": model.n,
        "d": d,
        "scheme": scheme.kind,
        "cap": scheme.resolve_cap(g, model) if scheme.uses_cap and g.adjacency.nnz else None,
        "deviation": deviation,
        "ratio": _ratio(deviation, math.sqrt(d)),
        "max_degree": max_degree,
        "raw_norm": raw_norm,
        "raw_ratio": _ratio(raw_norm, math.sqrt(max_degree)),
        "regularized_d_prime": d_prime,
        "ratio_with_d_prime": _ratio(deviation, math.sqrt(d) + math.sqrt(d_prime)),
        "converged": converged and raw_converged,
    }
    logger.info("%s trial %d: |A' - EA| / sqrt(d) = %s", measurements["cell"], seed.stream_index,
                measurements["ratio"])
    return measurements


def summarize_concentration(trials: List[dict]) -> Tuple[dict, dict]:
    cells = _cells(trials)
    summary = {}
    for name, members in cells.items():
        summary[name] = {
            "n": members[0]["n"],
            "d": members[0]["d"],
            "scheme": members[0]["scheme"],
            "ratio": summarize(t["ratio"] for t in members),
            "raw_ratio": summarize(t["raw_ratio"] for t in members),
            "ratio_with_d_prime": summarize(t["ratio_with_d_prime"] for t in members),
        }

    flags = {"converged": all(t["converged"] for t in trials), "trends": {}}
    groups = defaultdict(list)
    for name, cell in summary.items():
        scheme = name.split("|", 1)[1]
        groups[(scheme, round(cell["d"], 9))].append(cell)
    for (scheme, d), members in sorted(groups.items()):
        members.sort(key=lambda cell: cell["n"])
        medians = [cell["ratio"]["median"] for cell in members]
        spread = relative_spread(medians)
        flags["trends"][f"{scheme}|d={d:.6g}"] = {
            "n": [cell["n"] for cell in members],
            "medians": medians,
            "increasing": strictly_increasing(medians),
            "spread": spread,
            "stable": None if spread is None else spread <= 0.15,
        }
    return summary, flags


# laplacian

def laplacian_trial(model: ProbabilityModel, tau: float, seed: SeedSpec) -> dict:
    g = sample(model, seed)
    d = max_rate(model)
    observed = laplacian(tau_shift(g, tau))
    expected = expected_laplacian(model, tau)
    deviation, converged = measured_norm(compose_difference(observed, expected), seed.stream_index)
    parts = laplacian_deviation_parts(g, model, tau)
    fluctuation, fluctuation_converged = measured_norm(parts.fluctuation, seed.stream_index)
    mismatch, mismatch_converged = measured_norm(parts.degree_mismatch, seed.stream_index)
    return {
        "cell": f"{describe_model(model)}|tau={tau:.6g}",
        "stream_index": seed.stream_index,
        "n": model.n,
        "d": d,
        "tau": tau,
        "deviation": deviation,
        "scaled_deviation": math.sqrt(d) * deviation,
        "fluctuation_norm": fluctuation,
        "degree_mismatch_norm": mismatch,
        "reference_rate": tau ** -0.5 * (1.0 + d / tau) ** 2.5,
        "converged": converged and fluctuation_converged and mismatch_converged,
    }


def summarize_laplacian(trials: List[dict]) -> Tuple[dict, dict]:
    summary = {}
    for name, members in _cells(trials).items():
        summary[name] = {
            "n": members[0]["n"],
            "d": members[0]["d"],
            "tau": members[0]["tau"],
            "scaled_deviation": summarize(t["scaled_deviation"] for t in members),
            "fluctuation_norm": summarize(t["fluctuation_norm"] for t in members),
            "degree_mismatch_norm": summarize(t["degree_mismatch_norm"] for t in members),
            "reference_rate": members[0]["reference_rate"],
        }
    flags = {"converged": all(t["converged"] for t in trials), "trends": {}}
    groups = defaultdict(list)
    for cell in summary.values():
        groups[(round(cell["d"], 9), cell["tau"])].append(cell)
    for (d, tau), members in sorted(groups.items()):
        members.sort(key=lambda cell: cell["n"])
        medians = [cell["scaled_deviation"]["median"] for cell in members]
        flags["trends"][f"d={d:.6g}|tau={tau:.6g}"] = {
            "n": [cell["n"] for cell in members],
            "medians": medians,
            "non_increasing": non_increasing(medians),
        }
    return summary, flags


# sbm

def sbm_trial(n: int, a: float, b: float, tau: Optional[float], seed: SeedSpec,
              check_davis_kahan: bool = True) -> dict:
    g, truth = sbm_instance(n, a, b, seed)
    shift = average_degree(g) if tau is None else tau
    partition = spectral_partition(g, shift, seed=seed.stream_index)
    measurements = {
        "cell": f"sbm(n={n},a={a:.6g},b={b:.6g})",
        "stream_index": seed.stream_index,
        "tau": shift,
        "average_degree": average_degree(g),
        "eigenvalue": partition.eigenvalue,
        "misclassification": misclassification(partition.labels, truth),
    }
    if check_davis_kahan:
        model = BlockTwoModel(n=n, a=a, b=b)
        check = davis_kahan_check(g, model, shift, seed=seed.stream_index, partition=partition)
        measurements.update({f"dk_{key}": value for key, value in check.as_dict().items()})
    logger.info("%s trial %d: misclassification %.4f", measurements["cell"], seed.stream_index,
                measurements["misclassification"])
    return measurements


def summarize_sbm(trials: List[dict]) -> Tuple[dict, dict]:
    summary = {}
    flags = {}
    for name, members in _cells(trials).items():
        summary[name] = {
            "misclassification": summarize(t["misclassification"] for t in members),
            "average_degree": summarize(t["average_degree"] for t in members),
        }
        checks = [t["dk_holds"] for t in members if t.get("dk_gap_valid")]
        if "dk_distance" in members[0]:
            summary[name]["dk_distance"] = summarize(t["dk_distance"] for t in members)
            summary[name]["dk_predicted"] = summarize(t["dk_predicted"] for t in members)
        flags[name] = {
            "gap_valid_trials": len(checks),
            "davis_kahan_holds": all(checks) if checks else None,
        }
    return summary, flags


# decompose

def decompose_trial(model: ProbabilityModel, r: float, d: Optional[float], directed: bool,
                    slack: float, seed: SeedSpec) -> Tuple[List[dict], Dict[str, EdgeDecomposition]]:
    """
    Decompose one sample; undirected samples are split into their two triangles.
    """
    rate = max_rate(model) if d is None else d
    if directed:
        parts = [("directed", sample_directed(model, seed), expected_adjacency(model))]
    else:
        g = sample(model, seed)
        parts = [
            ("upper", g.upper_triangle(), triangular_expectation(model, upper=True)),
            ("lower", g.lower_triangle(), triangular_expectation(model, upper=False)),
        ]

    measurements, decompositions = [], {}
    for name, graph, expectation in parts:
        dec = decompose(graph, expectation, r, rate, seed=seed.stream_index)
        report = verify_decomposition(graph, expectation, dec, rate, r, slack=slack, seed=seed.stream_index)
        decompositions[name] = dec
        measurements.append({
            "cell": f"{describe_model(model)}|{name}",
            "stream_index": seed.stream_index,
            "part": name,
            "r": r,
            "d": rate,
            "classes": {key: int(dec.mask(key).sum()) for key in ("N", "R", "C")},
            "overflow": sum(t.overflow_rows + t.overflow_cols for t in dec.trace),
            "gp_converged": all(all(t.gp_converged) for t in dec.trace),
            **report.as_dict(),
        })
    return measurements, decompositions


def summarize_decompose(trials: List[dict]) -> Tuple[dict, dict]:
    summary = {}
    for name, members in _cells(trials).items():
        summary[name] = {
            "normal_ratio": summarize(t["normal_ratio"] for t in members),
            "normal_norm": summarize(t["normal_norm"] for t in members),
            "r_columns": summarize(t["r_columns"] for t in members),
            "c_rows": summarize(t["c_rows"] for t in members),
            "rounds": summarize(t["rounds"] for t in members),
            "exceptional_pairs": summarize(t["exceptional_pairs"] for t in members),
        }
    ratios = [t["normal_ratio"] for t in trials if t["normal_ratio"] is not None]
    flags = {
        "structural_ok": all(t["structural_ok"] for t in trials),
        "partition_ok": all(t["partition_ok"] for t in trials),
        "row_bound_ok": all(t["row_bound_ok"] for t in trials),
        "col_bound_ok": all(t["col_bound_ok"] for t in trials),
        "footprint_ok": all(t["footprint_ok"] for t in trials),
        "normal_ratio_max": max(ratios) if ratios else None,
        "normal_ratio_within_10": all(ratio <= 10 for ratio in ratios) if ratios else None,
    }
    return summary, flags


# gp_check

def random_matrix(rng: np.random.Generator, rows: int, cols: int, distribution: str) -> np.ndarray:
    if distribution == "sign":
        return rng.choice([-1.0, 1.0], size=(rows, cols))
    if distribution == "gaussian":
        return rng.standard_normal((rows, cols))
    return rng.uniform(-1.0, 1.0, size=(rows, cols))


def gp_check_trial(rows: int, cols: int, distribution: str, deltas: List[float], exact: bool,
                   seed: SeedSpec) -> dict:
    B = random_matrix(seed.generator(GP_STREAM), rows, cols, distribution)
    weights = gp_weights(B, seed=seed.stream_index)
    if exact:
        inf_to_2 = inf_to_2_norm_exact(B)
    else:
        inf_to_2 = inf_to_2_norm_lower(B, trials=concentration_settings.GP_LOWER_TRIALS, seed=seed.stream_index)
    ratio = weights.achieved_norm / inf_to_2 if inf_to_2 > 0 else None
    slack_limit = SQRT_HALF_PI * concentration_settings.GP_SLACK

    certificates = []
    for delta in deltas:
        certificate = gp_submatrix(B, delta, weights=weights)
        certificates.append({
            "delta": delta,
            "columns": int(certificate.columns.size),
            "min_columns": certificate.min_columns,
            "submatrix_norm": certificate.submatrix_norm,
            "bound": certificate.bound,
            "holds": certificate.columns.size >= certificate.min_columns - 1e-9
            and certificate.submatrix_norm <= certificate.bound * (1 + 1e-10),
        })

    within_slack = ratio is not None and ratio <= slack_limit
    if ratio is not None and not within_slack:
        logger.warning("Trial %d: factorization ratio %.4f above %.4f.", seed.stream_index, ratio, slack_limit)
    return {
        "cell": f"gp({rows}x{cols},{distribution})",
        "stream_index": seed.stream_index,
        "achieved_norm": weights.achieved_norm,
        "inf_to_2": inf_to_2,
        "inf_to_2_exact": exact,
        "ratio": ratio,
        "left_inequality": inf_to_2 <= weights.achieved_norm * (1 + 1e-12),
        "within_slack": within_slack,
        "converged": weights.converged,
        "iterations": weights.iterations,
        "certificates": certificates,
    }


def summarize_gp_check(trials: List[dict]) -> Tuple[dict, dict]:
    within = [t["within_slack"] for t in trials]
    summary = {
        "ratio": summarize(t["ratio"] for t in trials),
        "slack_limit": SQRT_HALF_PI * concentration_settings.GP_SLACK,
        "within_slack_fraction": float(np.mean(within)) if within else None,
    }
    flags = {
        "left_inequality": all(t["left_inequality"] for t in trials),
        "certificates": all(c["holds"] for t in trials for c in t["certificates"]),
        "ratio_within_slack_95": bool(summary["within_slack_fraction"] is not None
                                      and summary["within_slack_fraction"] >= 0.95),
    }
    return summary, flags
