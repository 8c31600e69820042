from rest_framework import serializers

from .conf import concentration_settings
from .exceptions import ConcentrationError
from .graph_model import UniformModel, model_from_dict
from .models import ExperimentRun, TrialMeasurement
from .regularize import CAP_RULES, SCHEME_KINDS, RegularizationScheme

MODEL_KIND_CHOICES = ["uniform", "rank_one", "degree_profile", "block_two", "explicit"]
U64_MAX = (1 << 64) - 1


class ProbabilityModelSerializer(serializers.Serializer):
    """
    Serializer for probability model dictionaries; ``validate`` adds the built ``model``.
    """
    kind = serializers.ChoiceField(choices=MODEL_KIND_CHOICES)
    n = serializers.IntegerField(min_value=1)
    p = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    theta = serializers.ListField(child=serializers.FloatField(min_value=0.0), required=False)
    low = serializers.FloatField(min_value=0.0, required=False)
    high = serializers.FloatField(min_value=0.0, required=False)
    high_fraction = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    a = serializers.FloatField(min_value=0.0, required=False)
    b = serializers.FloatField(min_value=0.0, required=False)
    P = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()), required=False)

    def validate(self, attrs):
        try:
            attrs["model"] = model_from_dict(attrs)
        except ConcentrationError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class RegularizationSchemeSerializer(serializers.Serializer):
    """
    Serializer for regularization scheme dictionaries; ``validate`` adds ``regularization``.
    """
    scheme = serializers.ChoiceField(choices=list(SCHEME_KINDS), default="identity")
    cap = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    cap_rule = serializers.ChoiceField(choices=list(CAP_RULES), default="fixed")
    cap_factor = serializers.FloatField(min_value=0.0, default=1.0)
    tau = serializers.FloatField(min_value=0.0, default=0.0)

    def validate(self, attrs):
        try:
            attrs["regularization"] = RegularizationScheme.from_dict(attrs)
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class CellSerializer(serializers.Serializer):
    """
    Serializer for one grid cell: either a full ``model`` or the shorthand ``n``, ``d``
    for the uniform model with p = d / n.
    """
    model = ProbabilityModelSerializer(required=False)
    n = serializers.IntegerField(min_value=1, required=False)
    d = serializers.FloatField(min_value=0.0, required=False)

    def validate(self, attrs):
        if "model" in attrs:
            return attrs
        if "n" not in attrs or "d" not in attrs:
            raise serializers.ValidationError("A cell needs a model or both n and d.")
        if attrs["d"] > attrs["n"]:
            raise serializers.ValidationError("d must not exceed n.")
        model = UniformModel(n=attrs["n"], p=attrs["d"] / attrs["n"])
        attrs["model"] = {"kind": model.kind, "n": model.n, "p": model.p, "model": model}
        return attrs


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Serializer for the options every experiment command shares.
    """
    seed = serializers.IntegerField(min_value=0, max_value=U64_MAX)
    trials = serializers.IntegerField(min_value=1, default=1)
    threads = serializers.IntegerField(min_value=1, default=1)
    out = serializers.CharField(required=False, allow_null=True)


class SampleConfigSerializer(ExperimentConfigSerializer):
    model = ProbabilityModelSerializer()
    directed = serializers.BooleanField(default=False)


class SpectrumConfigSerializer(ExperimentConfigSerializer):
    model = ProbabilityModelSerializer(required=False)
    graph = serializers.CharField(required=False)
    scheme = RegularizationSchemeSerializer(default=dict)
    bins = serializers.IntegerField(min_value=1, required=False)
    tail_threshold = serializers.FloatField(min_value=0.0, required=False, allow_null=True)

    def validate_scheme(self, value):
        if "regularization" not in value:
            value = dict(value, regularization=RegularizationScheme.from_dict(value))
        return value

    def validate(self, attrs):
        if "model" not in attrs and "graph" not in attrs:
            raise serializers.ValidationError("The spectrum command needs a model or a graph file.")
        attrs.setdefault("bins", concentration_settings.HISTOGRAM_BINS)
        return attrs


class ConcentrationConfigSerializer(ExperimentConfigSerializer):
    cells = serializers.ListField(child=CellSerializer(), min_length=1)
    schemes = serializers.ListField(
        child=RegularizationSchemeSerializer(), default=lambda: [{"scheme": "identity"}]
    )

    def validate_schemes(self, value):
        schemes = []
        for scheme in value:
            if "regularization" not in scheme:
                scheme = dict(scheme, regularization=RegularizationScheme.from_dict(scheme))
            if scheme["regularization"].kind == "tau":
                raise serializers.ValidationError("The tau shift applies to Laplacians; use the laplacian command.")
            schemes.append(scheme)
        return schemes


class LaplacianConfigSerializer(ExperimentConfigSerializer):
    cells = serializers.ListField(child=CellSerializer(), min_length=1)
    tau = serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=1)

    def validate_tau(self, value):
        if any(tau <= 0 for tau in value):
            raise serializers.ValidationError("tau must be positive.")
        return value


class BlockCellSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=2)
    a = serializers.FloatField(min_value=0.0)
    b = serializers.FloatField(min_value=0.0)

    def validate(self, attrs):
        if attrs["n"] % 2:
            raise serializers.ValidationError("n must be even.")
        if not attrs["b"] <= attrs["a"] <= attrs["n"]:
            raise serializers.ValidationError("Rates must satisfy 0 <= b <= a <= n.")
        return attrs


class SbmConfigSerializer(ExperimentConfigSerializer):
    cells = serializers.ListField(child=BlockCellSerializer(), min_length=1)
    tau = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    davis_kahan = serializers.BooleanField(default=True)


class DecomposeConfigSerializer(ExperimentConfigSerializer):
    model = ProbabilityModelSerializer()
    r = serializers.FloatField(min_value=1.0, default=1.0)
    d = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    directed = serializers.BooleanField(default=True)
    slack = serializers.FloatField(min_value=0.0, required=False)

    def validate(self, attrs):
        limit = concentration_settings.EXPLICIT_MAX_N
        if attrs["model"]["n"] > limit:
            raise serializers.ValidationError(f"Decomposition is limited to n <= {limit}.")
        attrs.setdefault("slack", concentration_settings.DECOMPOSE_SLACK)
        return attrs


class GpCheckConfigSerializer(ExperimentConfigSerializer):
    rows = serializers.IntegerField(min_value=1, default=8)
    cols = serializers.IntegerField(min_value=1, default=12)
    distribution = serializers.ChoiceField(choices=["uniform", "sign", "gaussian"], default="uniform")
    deltas = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0), default=lambda: [0.25, 0.5]
    )
    exact = serializers.BooleanField(default=True)

    def validate(self, attrs):
        if attrs["exact"] and attrs["cols"] > concentration_settings.EXACT_SIGN_MAX_WIDTH:
            raise serializers.ValidationError(
                f"Exact mode needs at most {concentration_settings.EXACT_SIGN_MAX_WIDTH} columns."
            )
        if any(not 0 < delta < 1 for delta in attrs["deltas"]):
            raise serializers.ValidationError("Every delta must lie strictly between 0 and 1.")
        return attrs


class ExperimentReportSerializer(serializers.Serializer):
    """
    Serializer for the report.json document of a run.
    """
    run_id = serializers.CharField()
    command = serializers.CharField()
    config_hash = serializers.CharField(min_length=40, max_length=40)
    parameters = serializers.DictField()
    seeds = serializers.DictField()
    trials = serializers.ListField(child=serializers.DictField())
    summary = serializers.DictField()
    flags = serializers.DictField()
    artifacts = serializers.ListField(child=serializers.CharField())
    output_dir = serializers.CharField()
    wall_clock = serializers.FloatField(min_value=0.0)


class TrialMeasurementSerializer(serializers.ModelSerializer):
    """
    Serializer for stored trial measurements.
    """
    cell = serializers.CharField(max_length=255, allow_blank=True, required=False)

    class Meta:
        model = TrialMeasurement
        fields = [
            "cell",
            "stream_index",
            "measurements",
        ]


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Serializer for stored experiment runs.
    """
    trials = TrialMeasurementSerializer(many=True, read_only=True)

    class Meta:
        model = ExperimentRun
        fields = [
            "run_id",
            "command",
            "config_hash",
            "master_seed",
            "parameters",
            "summary",
            "flags",
            "output_dir",
            "wall_clock",
            "created",
            "trials",
        ]
