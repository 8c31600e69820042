"""
Django settings for the GraphConcentration project.

The project has no web surface: Django provides the settings layer, the
management-command CLI, the ORM that records experiment runs and the test
runner.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    "GRAPH_CONCENTRATION_SECRET_KEY",
    "django-insecure-7k2q!v3m(ad0x_spectral-concentration-dev-key",
)

DEBUG = os.environ.get("GRAPH_CONCENTRATION_DEBUG", "0") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "concentration",
    "rest_framework",
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}


# Numerical defaults of the concentration app. Missing keys fall back to
# concentration.conf.DEFAULTS.
GRAPH_CONCENTRATION = {
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
    "OUTPUT_DIR": BASE_DIR / "runs",
    "PERSIST_RUNS": True,
}


REST_FRAMEWORK = {
    "DEFAULT_AUTHENTICATION_CLASSES": (),
    "DEFAULT_PERMISSION_CLASSES": (),
    "UNAUTHENTICATED_USER": None,
    "DEFAULT_RENDERER_CLASSES": (
        "rest_framework.renderers.JSONRenderer",
    ),
}


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "concentration": {
            "handlers": ["console"],
            "level": os.environ.get("GRAPH_CONCENTRATION_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = False


# Default primary key field type
# https://docs.djangoproject.com/en/4.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
