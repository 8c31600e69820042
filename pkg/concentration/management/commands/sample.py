from ...decorators import recorded_experiment
from ...experiments import sample_trial
from ...graph_model import SeedSpec
from ...graphio import write_graph, write_model
from ...serializers import SampleConfigSerializer
from ...utilities import summarize
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Sample graphs from a probability model and write them as graph files."
    command_name = "sample"
    config_serializer_class = SampleConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        model = config["model"]["model"]
        directed = config["directed"]
        artifacts = [write_model(run_dir / "model.json", model).name]

        def trial(stream_index):
            g, measurements = sample_trial(model, directed, SeedSpec(config["seed"], stream_index))
            path = write_graph(run_dir / f"graph-{stream_index}.csv", g)
            measurements["graph_file"] = path.name
            return measurements

        trials = self.map_trials(trial, range(config["trials"]), config["threads"])
        artifacts.extend(t["graph_file"] for t in trials)
        return {
            "parameters": {"model": model.to_dict(), "directed": directed},
            "trials": trials,
            "summary": {
                "edges": summarize(t["edges"] for t in trials),
                "max_degree": summarize(t["max_degree"] for t in trials),
            },
            "flags": {},
            "artifacts": artifacts,
        }
