from django.conf import settings

DEFAULTS = {
    "EXPLICIT_MAX_N": 4096,
    "FULL_SPECTRUM_MAX_N": 2048,
    "EXACT_SIGN_MAX_WIDTH": 24,
    "POWER_TOL": 1e-7,
    "POWER_MAX_ITER": 5000,
    "EIGEN_TOL": 1e-8,
    "GP_ITERATIONS": 500,
    "GP_TOL": 1e-6,
    "GP_SLACK": 1.10,
    "GP_EXACT_CHECK_WIDTH": 16,
    "GP_LOWER_TRIALS": 4,
    "DECOMPOSE_SLACK": 4,
    "DECOMPOSE_MIN_BLOCK": 8,
    "HISTOGRAM_BINS": 100,
    "OUTPUT_DIR": "runs",
    "PERSIST_RUNS": True,
}


class ConcentrationSettings:
    """
    Attribute access to ``settings.GRAPH_CONCENTRATION`` with defaults.

    Values are looked up on every access so ``override_settings`` works in tests.
    """

    def __getattr__(self, name):
        if name not in DEFAULTS:
            raise AttributeError(f"Invalid concentration setting: '{name}'")
        user_settings = getattr(settings, "GRAPH_CONCENTRATION", None) or {}
        return user_settings.get(name, DEFAULTS[name])


concentration_settings = ConcentrationSettings()
