from ...decorators import recorded_experiment
from ...experiments import sbm_trial, summarize_sbm
from ...graph_model import SeedSpec
from ...graphio import write_rows
from ...serializers import SbmConfigSerializer
from ..base import ExperimentCommand, stream_indices


class Command(ExperimentCommand):
    help = "Spectral community detection on two-block models, with the Davis-Kahan comparison."
    command_name = "sbm"
    config_serializer_class = SbmConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        cells = config["cells"]
        jobs = [
            (cell["n"], cell["a"], cell["b"], config.get("tau"), SeedSpec(config["seed"], stream_index),
             config["davis_kahan"])
            for cell_index, cell in enumerate(cells)
            for stream_index in stream_indices(cell_index, config["trials"])
        ]
        trials = self.map_trials(lambda job: sbm_trial(*job), jobs, config["threads"])
        summary, flags = summarize_sbm(trials)

        path = write_rows(
            run_dir / "misclassification.csv",
            ["cell", "stream_index", "tau", "misclassification"],
            sorted((t["cell"], t["stream_index"], t["tau"], t["misclassification"]) for t in trials),
        )
        return {
            "parameters": {
                "cells": [dict(cell) for cell in cells],
                "tau": config.get("tau"),
                "davis_kahan": config["davis_kahan"],
                "trials": config["trials"],
            },
            "trials": trials,
            "summary": summary,
            "flags": flags,
            "artifacts": [path.name],
        }
