from ...decorators import recorded_experiment
from ...experiments import gp_check_trial, summarize_gp_check
from ...graph_model import SeedSpec
from ...graphio import write_rows
from ...serializers import GpCheckConfigSerializer
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Factorization weights and submatrix certificates over random matrices."
    command_name = "gp_check"
    config_serializer_class = GpCheckConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        def trial(stream_index):
            return gp_check_trial(
                config["rows"], config["cols"], config["distribution"], list(config["deltas"]),
                config["exact"], SeedSpec(config["seed"], stream_index),
            )

        trials = self.map_trials(trial, range(config["trials"]), config["threads"])
        summary, flags = summarize_gp_check(trials)
        path = write_rows(
            run_dir / "ratios.csv",
            ["stream_index", "achieved_norm", "inf_to_2", "ratio", "converged"],
            sorted((t["stream_index"], t["achieved_norm"], t["inf_to_2"], t["ratio"], t["converged"])
                   for t in trials),
        )
        return {
            "parameters": {
                "rows": config["rows"],
                "cols": config["cols"],
                "distribution": config["distribution"],
                "deltas": list(config["deltas"]),
                "exact": config["exact"],
            },
            "trials": trials,
            "summary": summary,
            "flags": flags,
            "artifacts": [path.name],
        }
