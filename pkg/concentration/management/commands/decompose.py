from ...decorators import recorded_experiment
from ...experiments import decompose_trial, summarize_decompose
from ...graph_model import SeedSpec
from ...graphio import write_decomposition
from ...serializers import DecomposeConfigSerializer
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Split sampled graphs into the N, R and C edge classes and verify the decomposition."
    command_name = "decompose"
    config_serializer_class = DecomposeConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        model = config["model"]["model"]

        def trial(stream_index):
            return decompose_trial(
                model, config["r"], config.get("d"), config["directed"], config["slack"],
                SeedSpec(config["seed"], stream_index),
            )

        results = self.map_trials(trial, range(config["trials"]), config["threads"])
        trials = [measurement for measurements, _ in results for measurement in measurements]

        # Class files of the first trial only; every trial is in the report.
        artifacts = []
        for part, dec in results[0][1].items():
            csv_path = run_dir / f"decomposition-{part}.csv"
            trace_path = run_dir / f"trace-{part}.json"
            write_decomposition(csv_path, trace_path, dec)
            artifacts.extend([csv_path.name, trace_path.name])

        summary, flags = summarize_decompose(trials)
        return {
            "parameters": {
                "model": model.to_dict(),
                "r": config["r"],
                "d": config.get("d"),
                "directed": config["directed"],
                "slack": config["slack"],
            },
            "trials": trials,
            "summary": summary,
            "flags": flags,
            "artifacts": artifacts,
        }
