import numpy as np
from django.test import SimpleTestCase, TestCase
from rest_framework import serializers

from concentration.models import ExperimentRun
from concentration.serializers import (
    ConcentrationConfigSerializer,
    ExperimentRunSerializer,
    GpCheckConfigSerializer,
    SampleConfigSerializer,
)
from concentration.utilities import (
    config_hash,
    non_increasing,
    record_run,
    relative_spread,
    strictly_increasing,
    summarize,
    to_builtin,
)


class HashTestCase(SimpleTestCase):
    def test_matches_git_blob_hash(self):
        self.assertEqual(config_hash({}), "9e26dfeeb6e641a33dae4961196235bdb965b21b")
        self.assertEqual(config_hash({"seed": 1}), "26c05db5893b2e9ee3ba338713a4a927b469c1d8")

    def test_key_order_does_not_matter(self):
        self.assertEqual(config_hash({"a": 1, "b": 2}), config_hash({"b": 2, "a": 1}))


class StatisticsTestCase(SimpleTestCase):
    def test_summarize(self):
        summary = summarize([4.0, None, 1.0, 3.0, 2.0])
        self.assertEqual(summary["count"], 4)
        self.assertAlmostEqual(summary["median"], 2.5)
        self.assertAlmostEqual(summary["q1"], 1.75)
        self.assertAlmostEqual(summary["q3"], 3.25)

    def test_summarize_nothing(self):
        self.assertIsNone(summarize([None])["median"])

    def test_trends(self):
        self.assertTrue(strictly_increasing([1.0, 2.0, 3.0]))
        self.assertFalse(strictly_increasing([1.0, 1.0]))
        self.assertIsNone(strictly_increasing([1.0]))
        self.assertTrue(non_increasing([3.0, 3.0, 1.0]))
        self.assertAlmostEqual(relative_spread([2.0, 2.2, 2.1]), 0.1)

    def test_to_builtin(self):
        data = to_builtin({"a": np.float64(1.5), "b": np.array([1, 2]), "c": np.bool_(True), "d": float("nan")})
        self.assertEqual(data, {"a": 1.5, "b": [1, 2], "c": True, "d": None})
        self.assertIs(type(data["a"]), float)


class ConfigSerializerTestCase(SimpleTestCase):
    def test_sample_config_builds_model(self):
        serializer = SampleConfigSerializer(data={"seed": 3, "model": {"kind": "uniform", "n": 10, "p": 0.1}})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data["model"]["model"].n, 10)
        self.assertEqual(serializer.validated_data["trials"], 1)

    def test_seed_is_required(self):
        serializer = SampleConfigSerializer(data={"model": {"kind": "uniform", "n": 10, "p": 0.1}})
        self.assertFalse(serializer.is_valid())
        self.assertIn("seed", serializer.errors)

    def test_invalid_model(self):
        serializer = SampleConfigSerializer(data={"seed": 3, "model": {"kind": "block_two", "n": 9, "a": 2, "b": 1}})
        self.assertFalse(serializer.is_valid())

    def test_cell_shorthand(self):
        serializer = ConcentrationConfigSerializer(data={"seed": 1, "cells": [{"n": 100, "d": 4}]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        model = serializer.validated_data["cells"][0]["model"]["model"]
        self.assertAlmostEqual(model.p, 0.04)
        self.assertEqual(serializer.validated_data["schemes"][0]["regularization"].kind, "identity")

    def test_tau_scheme_rejected_for_adjacency_grid(self):
        serializer = ConcentrationConfigSerializer(
            data={"seed": 1, "cells": [{"n": 100, "d": 4}], "schemes": [{"scheme": "tau", "tau": 2}]}
        )
        self.assertFalse(serializer.is_valid())

    def test_gp_check_exact_width(self):
        serializer = GpCheckConfigSerializer(data={"seed": 1, "cols": 30})
        self.assertFalse(serializer.is_valid())


class RecordRunTestCase(TestCase):
    def setUp(self):
        self.report = {
            "run_id": "sample-abc-1",
            "command": "sample",
            "config_hash": "0" * 40,
            "parameters": {},
            "seeds": {"master_seed": 1, "stream_indices": [0, 1]},
            "trials": [{"cell": "x", "stream_index": 0}, {"cell": "x", "stream_index": 1}],
            "summary": {},
            "flags": {},
            "artifacts": [],
            "output_dir": "/tmp/run",
            "wall_clock": 0.5,
        }

    def test_record_run(self):
        run = record_run(self.report)
        self.assertEqual(str(run), "sample-abc-1")
        self.assertEqual(run.trials.count(), 2)

    def test_record_run_replaces_earlier_run(self):
        record_run(self.report)
        self.report["trials"] = self.report["trials"][:1]
        record_run(self.report)
        self.assertEqual(ExperimentRun.objects.count(), 1)
        self.assertEqual(ExperimentRun.objects.get().trials.count(), 1)

    def test_stored_run_renders_through_serializer(self):
        run = record_run(self.report)
        data = ExperimentRunSerializer(run).data
        self.assertEqual(data["run_id"], "sample-abc-1")
        self.assertEqual(data["master_seed"], "1")
        self.assertEqual([trial["stream_index"] for trial in data["trials"]], [0, 1])
        self.assertEqual(data["trials"][0]["measurements"], {"cell": "x", "stream_index": 0})

    def test_invalid_trial_is_rejected(self):
        self.report["trials"].append({"cell": "x", "stream_index": -1})
        with self.assertRaises(serializers.ValidationError):
            record_run(self.report)
        self.assertEqual(ExperimentRun.objects.count(), 0)
