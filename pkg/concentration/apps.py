from django.apps import AppConfig


class ConcentrationConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "concentration"
    verbose_name = "Graph concentration experiments"
