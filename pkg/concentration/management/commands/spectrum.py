from ...decorators import recorded_experiment
from ...experiments import spectrum_histogram, spectrum_trial, summarize_spectrum
from ...graph_model import SeedSpec, sample
from ...graphio import read_graph, write_rows
from ...serializers import SpectrumConfigSerializer
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Full spectrum of a graph before and after regularization, as raw eigenvalues and a histogram."
    command_name = "spectrum"
    config_serializer_class = SpectrumConfigSerializer

    @recorded_experiment
    def run_experiment(self, config, run_dir):
        scheme = config["scheme"]["regularization"]
        model = config["model"]["model"] if "model" in config else None
        if model is None:
            graph = read_graph(config["graph"])
            streams = [0]
        else:
            graph = None
            streams = range(config["trials"])

        def trial(stream_index):
            g = graph if graph is not None else sample(model, SeedSpec(config["seed"], stream_index))
            measurements, before, after = spectrum_trial(
                g, scheme, model, stream_index, tail_threshold=config.get("tail_threshold")
            )
            eigenvalues = write_rows(
                run_dir / f"eigenvalues-{stream_index}.csv",
                ["index", "before", "after"],
                ((k, float(before[k]), float(after[k])) for k in range(before.size)),
            )
            histogram = write_rows(
                run_dir / f"histogram-{stream_index}.csv",
                ["left", "right", "count_before", "count_after"],
                spectrum_histogram(before, after, config["bins"]),
            )
            measurements["artifacts"] = [eigenvalues.name, histogram.name]
            return measurements

        trials = self.map_trials(trial, streams, config["threads"])
        artifacts = [name for t in trials for name in t.pop("artifacts")]
        summary, flags = summarize_spectrum(trials)
        return {
            "parameters": {
                "model": model.to_dict() if model is not None else None,
                "graph": config.get("graph"),
                "scheme": scheme.to_dict(),
                "bins": config["bins"],
            },
            "trials": trials,
            "summary": summary,
            "flags": flags,
            "artifacts": artifacts,
        }
