# Generated by Django 4.2.11 on 2024-06-03 10:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "run_id",
                    models.CharField(max_length=64, primary_key=True, serialize=False),
                ),
                ("command", models.CharField(max_length=32)),
                ("config_hash", models.CharField(max_length=40)),
                ("master_seed", models.CharField(max_length=20)),
                ("parameters", models.JSONField()),
                ("summary", models.JSONField(default=dict)),
                ("flags", models.JSONField(default=dict)),
                ("output_dir", models.CharField(max_length=255)),
                ("wall_clock", models.FloatField(null=True)),
                ("created", models.DateTimeField(auto_now_add=True)),
            ],
        ),
        migrations.CreateModel(
            name="TrialMeasurement",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("cell", models.CharField(blank=True, default="", max_length=255)),
                ("stream_index", models.PositiveIntegerField()),
                ("measurements", models.JSONField()),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="trials",
                        to="concentration.experimentrun",
                    ),
                ),
            ],
            options={
                "ordering": ["cell", "stream_index"],
            },
        ),
    ]
