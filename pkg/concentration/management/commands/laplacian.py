from ...decorators import recorded_experiment
from ...experiments import laplacian_trial, summarize_laplacian
from ...graph_model import SeedSpec
from ...graphio import write_rows
from ...serializers import LaplacianConfigSerializer
from ..base import ExperimentCommand, stream_indices


class Command(ExperimentCommand):
    help = "Monte Carlo grid of sqrt(d) |L(A_tau) - L(EA_tau)| over (n, d) cells and a list of tau values."
    command_name = "laplacian"
    config_serializer_class = LaplacianConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        models = [cell["model"]["model"] for cell in config["cells"]]
        jobs = [
            (model, tau, SeedSpec(config["seed"], stream_index))
            for cell_index, model in enumerate(models)
            for stream_index in stream_indices(cell_index, config["trials"])
            for tau in config["tau"]
        ]
        trials = self.map_trials(lambda job: laplacian_trial(*job), jobs, config["threads"])
        summary, flags = summarize_laplacian(trials)

        path = write_rows(
            run_dir / "tau_sweep.csv",
            ["cell", "n", "d", "tau", "median_scaled_deviation", "median_fluctuation_norm",
             "median_degree_mismatch_norm", "reference_rate"],
            (
                (name, cell["n"], cell["d"], cell["tau"], cell["scaled_deviation"]["median"],
                 cell["fluctuation_norm"]["median"], cell["degree_mismatch_norm"]["median"],
                 cell["reference_rate"])
                for name, cell in sorted(summary.items())
            ),
        )
        return {
            "parameters": {
                "cells": [model.to_dict() for model in models],
                "tau": list(config["tau"]),
                "trials": config["trials"],
            },
            "trials": trials,
            "summary": summary,
            "flags": flags,
            "artifacts": [path.name],
        }
