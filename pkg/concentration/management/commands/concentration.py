from ...decorators import recorded_experiment
from ...experiments import concentration_trial, summarize_concentration
from ...graph_model import SeedSpec
from ...graphio import write_rows
from ...serializers import ConcentrationConfigSerializer
from ..base import ExperimentCommand, stream_indices


class Command(ExperimentCommand):
    help = "Monte Carlo grid of |A' - EA| / sqrt(d) over (n, d) cells and regularization schemes."
    command_name = "concentration"
    config_serializer_class = ConcentrationConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        models = [cell["model"]["model"] for cell in config["cells"]]
        schemes = [scheme["regularization"] for scheme in config["schemes"]]
        # Every scheme of a cell sees the same samples.
        jobs = [
            (model, scheme, SeedSpec(config["seed"], stream_index))
            for cell_index, model in enumerate(models)
            for stream_index in stream_indices(cell_index, config["trials"])
            for scheme in schemes
        ]
        trials = self.map_trials(lambda job: concentration_trial(*job), jobs, config["threads"])
        summary, flags = summarize_concentration(trials)

        rows = [
            (name, cell["n"], cell["d"], cell["scheme"], cell["ratio"]["median"], cell["ratio"]["q1"],
             cell["ratio"]["q3"], cell["raw_ratio"]["median"], cell["ratio_with_d_prime"]["median"])
            for name, cell in sorted(summary.items())
        ]
        path = write_rows(
            run_dir / "cells.csv",
            ["cell", "n", "d", "scheme", "median_ratio", "q1_ratio", "q3_ratio", "median_raw_ratio",
             "median_ratio_with_d_prime"],
            rows,
        )
        return {
            "parameters": {
                "cells": [model.to_dict() for model in models],
                "schemes": [scheme.to_dict() for scheme in schemes],
                "trials": config["trials"],
            },
            "trials": trials,
            "summary": summary,
            "flags": flags,
            "artifacts": [path.name],
        }
