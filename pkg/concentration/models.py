from django.db import models


class ExperimentRun(models.Model):
    """
    Model to represent one run of an experiment command.
    """
    run_id = models.CharField(max_length=64, primary_key=True)
    command = models.CharField(max_length=32)
    config_hash = models.CharField(max_length=40)
    master_seed = models.CharField(max_length=20)
    parameters = models.JSONField()
    summary = models.JSONField(default=dict)
    flags = models.JSONField(default=dict)
    output_dir = models.CharField(max_length=255)
    wall_clock = models.FloatField(null=True)
    created = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return self.run_id


class TrialMeasurement(models.Model):
    """
    Model to store the measurements of one Monte Carlo trial.
    """
    run = models.ForeignKey("ExperimentRun", on_delete=models.CASCADE, related_name="trials")
    cell = models.CharField(max_length=255, blank=True, default="")
    stream_index = models.PositiveIntegerField()
    measurements = models.JSONField()

    class Meta:
        ordering = ["cell", "stream_index"]
