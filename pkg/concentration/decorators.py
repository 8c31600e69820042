import logging
import time
from pathlib import Path
from typing import Callable

from .conf import concentration_settings
from .graphio import write_json
from .serializers import ExperimentReportSerializer
from .utilities import config_hash, make_run_id, record_run, to_builtin

logger = logging.getLogger(__name__)


def recorded_experiment(func: Callable) -> Callable:
    """
    Decorator for ``ExperimentCommand.run_experiment`` that turns its result into a stored run.

    Args:
        func (Callable): Method returning ``parameters``, ``trials``, ``summary``
            and ``flags`` for a validated config.

    Returns:
        Callable: Decorated method returning the full report.
    """
    def wrapper(self, raw_config: dict, config: dict) -> dict:
        """
        Create the run directory, run the experiment and write config.json and report.json.

        Args:
            self: The command instance.
            raw_config (dict): The merged JSON config, as given.
            config (dict): The validated config.

        Returns:
            dict: The rendered report.
        """
        digest = config_hash(raw_config)
        run_id = make_run_id(self.command_name, digest, config["seed"])
        out = config.get("out") or Path(concentration_settings.OUTPUT_DIR) / run_id
        run_dir = Path(out)
        run_dir.mkdir(parents=True, exist_ok=True)
        write_json(run_dir / "config.json", raw_config)

        logger.info("Starting %s run %s (%d trials).", self.command_name, run_id, config["trials"])
        started = time.perf_counter()
        result = func(self, config, run_dir)
        wall_clock = time.perf_counter() - started

        trials = sorted(result["trials"], key=lambda trial: (str(trial.get("cell", "")), trial["stream_index"]))
        report = to_builtin({
            "run_id": run_id,
            "command": self.command_name,
            "config_hash": digest,
            "parameters": result.get("parameters", {}),
            "seeds": {
                "master_seed": config["seed"],
                "stream_indices": sorted({trial["stream_index"] for trial in trials}),
            },
            "trials": trials,
            "summary": result.get("summary", {}),
            "flags": result.get("flags", {}),
            "artifacts": result.get("artifacts", []),
            "output_dir": str(run_dir),
            "wall_clock": wall_clock,
        })
        serializer = ExperimentReportSerializer(data=report)
        serializer.is_valid(raise_exception=True)
        write_json(run_dir / "report.json", report)

        if concentration_settings.PERSIST_RUNS:
            record_run(report)
        logger.info("Finished %s run %s in %.2fs.", self.command_name, run_id, wall_clock)
        return report

    return wrapper
