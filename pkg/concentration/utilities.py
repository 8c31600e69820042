import hashlib
import json
from typing import Iterable, List, Optional

import numpy as np
from django.db import transaction

from .models import ExperimentRun
from .serializers import ExperimentRunSerializer, TrialMeasurementSerializer


def to_builtin(value):
    """
    Convert numpy scalars and arrays (also nested in dicts and lists) to plain Python values.
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def canonical_json(data) -> str:
    return json.dumps(to_builtin(data), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """
    Git blob hash (sha1 of ``blob <size>\\0<content>``) of the canonical JSON config.
    """
    content = canonical_json(config).encode("utf-8")
    header = f"blob {len(content)}\0".encode("utf-8")
    return hashlib.sha1(header + content).hexdigest()


def summarize(values: Iterable[Optional[float]]) -> dict:
    """
    Median and quartiles of the measured values, ignoring missing ones.

    Args:
        values: Measured values; None entries are skipped.

    Returns:
        dict: count, median, q1, q3, min and max (None when nothing was measured).
    """
    measured = np.array([value for value in values if value is not None], dtype=np.float64)
    if not measured.size:
        return {"count": 0, "median": None, "q1": None, "q3": None, "min": None, "max": None}
    q1, median, q3 = np.percentile(measured, [25, 50, 75])
    return {
        "count": int(measured.size),
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "min": float(measured.min()),
        "max": float(measured.max()),
    }


def strictly_increasing(values: List[Optional[float]]) -> Optional[bool]:
    if len(values) < 2 or any(value is None for value in values):
        return None
    return all(later > earlier for earlier, later in zip(values, values[1:]))


def non_increasing(values: List[Optional[float]]) -> Optional[bool]:
    if len(values) < 2 or any(value is None for value in values):
        return None
    return all(later <= earlier for earlier, later in zip(values, values[1:]))


def relative_spread(values: List[Optional[float]]) -> Optional[float]:
    """max / min - 1 over the measured values."""
    measured = [value for value in values if value is not None]
    if len(measured) < 2 or min(measured) <= 0:
        return None
    return max(measured) / min(measured) - 1.0


def make_run_id(command: str, digest: str, seed) -> str:
    return f"{command}-{digest[:12]}-{seed}"


@transaction.atomic
def record_run(report: dict) -> ExperimentRun:
    """
    Store a finished run and its trials, replacing an earlier run with the same id.

    Args:
        report: The rendered experiment report.

    Returns:
        ExperimentRun: The stored run.
    """
    existing = ExperimentRun.objects.filter(run_id=report["run_id"]).first()
    serializer = ExperimentRunSerializer(existing, data={
        "run_id": report["run_id"],
        "command": report["command"],
        "config_hash": report["config_hash"],
        "master_seed": str(report["seeds"]["master_seed"]),
        "parameters": report["parameters"],
        "summary": report["summary"],
        "flags": report["flags"],
        "output_dir": report["output_dir"],
        "wall_clock": report["wall_clock"],
    })
    serializer.is_valid(raise_exception=True)
    run = serializer.save()

    run.trials.all().delete()
    trials = TrialMeasurementSerializer(data=[
        {"cell": str(trial.get("cell", "")), "stream_index": trial["stream_index"], "measurements": trial}
        for trial in report["trials"]
    ], many=True)
    trials.is_valid(raise_exception=True)
    trials.save(run=run)
    return run
