import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Type

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers
from rest_framework.exceptions import ParseError

from ..exceptions import ConcentrationError
from ..graphio import read_json

logger = logging.getLogger(__name__)

OVERRIDES = ("seed", "out", "trials", "threads")


class ExperimentCommand(BaseCommand):
    """
    Base class of the experiment commands.

    Reads one JSON config document, lets ``--seed``, ``--out``, ``--trials``
    and ``--threads`` override it, validates the result with
    ``config_serializer_class`` and hands it to ``run_experiment``, which the
    subclasses decorate with ``recorded_experiment``.
    """

    command_name: str = ""
    config_serializer_class: Type[serializers.Serializer] = None

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Path of the JSON config document.")
        parser.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit).")
        parser.add_argument("--out", help="Run directory; defaults to OUTPUT_DIR/<run id>.")
        parser.add_argument("--trials", type=int, help="Trials per cell.")
        parser.add_argument("--threads", type=int, help="Worker threads for the trials.")

    def load_config(self, options: dict) -> dict:
        raw = {}
        if options.get("config"):
            try:
                raw = read_json(options["config"])
            except ParseError as exc:
                raise CommandError(f"{options['config']}: invalid JSON ({exc.detail}).")
            if not isinstance(raw, dict):
                raise CommandError(f"{options['config']}: the config must be a JSON object.")
        for key in OVERRIDES:
            if options.get(key) is not None:
                raw[key] = options[key]
        if raw.get("seed") is None:
            raise CommandError("--seed is required (or a 'seed' field in the config).")
        return raw

    def validate_config(self, raw: dict) -> dict:
        serializer = self.config_serializer_class(data=raw)
        serializer.is_valid(raise_exception=True)
        return serializer.validated_data

    def handle(self, *args, **options):
        try:
            raw = self.load_config(options)
            config = self.validate_config(raw)
            report = self.run_experiment(raw, config)
        except serializers.ValidationError as exc:
            raise CommandError(f"Invalid config: {json.dumps(exc.detail, default=str)}")
        except (ConcentrationError, ValueError, OSError) as exc:
            raise CommandError(str(exc))

        self.stdout.write(self.style.SUCCESS(f"Run {report['run_id']} written to {report['output_dir']}"))
        self.stdout.write(json.dumps(report["flags"], sort_keys=True))

    def run_experiment(self, raw_config: dict, config: dict) -> dict:
        raise NotImplementedError("Experiment commands must implement run_experiment().")

    def map_trials(self, func: Callable, jobs: Iterable, threads: int = 1) -> List:
        """
        Apply ``func`` to every job, on ``threads`` worker threads.

        The result order follows the job order whatever the thread count.
        """
        jobs = list(jobs)
        logger.debug("Running %d trials on %d threads.", len(jobs), threads)
        if threads <= 1 or len(jobs) <= 1:
            return [func(job) for job in jobs]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, jobs))


def stream_indices(cell_index: int, trials: int) -> range:
    """Stream indices of one grid cell; cells never share a stream."""
    return range(cell_index * trials, (cell_index + 1) * trials)

