"""
Test the command-line interface.
"""

import sys
import os
import json
import tempfile
import unittest

from click.testing import CliRunner

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from timebridge.cli import cli
from timebridge.config import RunConfig, build_default_map, read_config_file

SYNTH = ["--sigma", "1e-3", "--n", "20000", "--seed", "7"]
GRIDS = ["--dt-lo", "10", "--dt-hi", "1000", "--dt-k", "5",
         "--delta-lo", "0.5", "--delta-hi", "2", "--delta-k", "5"]


class CliTestCase(unittest.TestCase):
    """Runs commands inside a temporary output directory."""

    def setUp(self):
        self.runner = CliRunner()
        self._tmp = tempfile.TemporaryDirectory()
        self.out = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def invoke(self, *args, env=None):
        return self.runner.invoke(cli, ["--no-progress", *args], env=env)

    def path(self, *parts):
        return os.path.join(self.out, *parts)

    def load_json(self, name):
        with open(self.path(name), encoding="utf-8") as f:
            return json.load(f)


class TestSynthCommand(CliTestCase):

    def test_writes_series_and_sidecar(self):
        result = self.invoke("synth", *SYNTH, "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(os.path.exists(self.path("series.csv")))
        meta = self.load_json("series.csv.meta.json")
        self.assertEqual(meta["run_config"]["seed"], 7)
        self.assertEqual(meta["run_config"]["synth"]["sigma"], 1e-3)
        self.assertIn("PCG64", meta["run_config"]["synth"]["generator"])

    def test_deterministic(self):
        self.invoke("synth", *SYNTH, "-o", self.out, "--name", "a.csv")
        self.invoke("synth", *SYNTH, "-o", self.out, "--name", "b.csv")
        with open(self.path("a.csv"), "rb") as a, open(self.path("b.csv"), "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_missing_sigma_is_usage_error(self):
        result = self.invoke("synth", "--n", "100", "-o", self.out)
        self.assertEqual(result.exit_code, 2)

    def test_single_point_rejected(self):
        result = self.invoke("synth", "--sigma", "1e-3", "--n", "1", "-o", self.out)
        self.assertEqual(result.exit_code, 2)

    def test_output_dir_from_environment(self):
        result = self.invoke("synth", *SYNTH, env={"TIMEBRIDGE_OUTPUT_DIR": self.out})
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(os.path.exists(self.path("series.csv")))


class TestAnalysisCommands(CliTestCase):

    def test_scaling(self):
        result = self.invoke("scaling", *SYNTH, *GRIDS, "--reference", "brownian", "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        report = self.load_json("scaling.json")
        self.assertEqual(report["method"], "ols-loglog")
        self.assertEqual(report["run_config"]["delta_lo"], 0.5)
        self.assertEqual(report["laws"]["os_variability"]["x"][0], 0.005)
        self.assertIn("reference_comparison", report)
        for law in ("squared_returns", "os_variability", "normalized_dc_count", "mean_overshoot"):
            self.assertTrue(os.path.exists(self.path(f"{law}.csv")))
            self.assertTrue(os.path.exists(self.path(f"{law}.csv.meta.json")))

    def test_scaling_from_tick_file(self):
        self.invoke("synth", *SYNTH, "-o", self.out)
        result = self.invoke("scaling", "--input", self.path("series.csv"), *GRIDS, "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(os.path.exists(self.path("scaling.json")))

    def test_empty_input(self):
        empty = self.path("empty.csv")
        open(empty, "w").close()
        result = self.invoke("scaling", "--input", empty, *GRIDS, "-o", self.out)
        self.assertEqual(result.exit_code, 1)
        self.assertIn("empty input", result.output)

    def test_input_and_synth_are_exclusive(self):
        result = self.invoke("scaling", "--input", "ticks.csv", *SYNTH, "-o", self.out)
        self.assertEqual(result.exit_code, 2)

    def test_invariants(self):
        result = self.invoke("invariants", *SYNTH, *GRIDS, "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        for name in ("invariants.csv", "invariants.json", "lambda.json",
                     "model_invariants.csv", "summary.txt"):
            self.assertTrue(os.path.exists(self.path(name)), name)
        estimate = self.load_json("lambda.json")
        self.assertEqual(estimate["method"], "ratio-of-pooled-means")
        self.assertGreater(estimate["lambda"], 0)
        self.assertIn("Lambda", result.output)

    def test_invariants_needs_paired_grids(self):
        result = self.invoke("invariants", *SYNTH, *GRIDS, "--dt-k", "4", "-o", self.out)
        self.assertEqual(result.exit_code, 2)

    def test_dissect(self):
        result = self.invoke("dissect", *SYNTH, "--delta", "1", "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path("events.csv"), encoding="utf-8") as f:
            header = f.readline().strip()
        self.assertEqual(header, "confirm_time,direction,confirm_price,prev_extreme_price,prev_overshoot")
        summary = self.load_json("dissection.json")
        self.assertEqual(summary["delta"], 0.01)
        self.assertEqual(summary["delta_unit"], "fraction")

    def test_check(self):
        result = self.invoke("check", *SYNTH, "--interval", "60", "--delta", "1", "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        check = self.load_json("check.json")
        self.assertGreater(check["lhs"], 0)
        self.assertGreater(check["rhs"], 0)
        self.assertEqual(check["dt"], 60.0)

    def test_decompose(self):
        result = self.invoke("decompose", *SYNTH, "--delta", "1", "--window", "5000", "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path("decomposition.csv"), encoding="utf-8") as f:
            rows = f.read().splitlines()
        self.assertEqual(len(rows), 5)

    def test_every_output_carries_run_config(self):
        """JSON outputs embed the run configuration; other files get a sidecar."""
        runs = [
            ("synth", *SYNTH),
            ("dissect", *SYNTH, "--delta", "1"),
            ("scaling", *SYNTH, *GRIDS),
            ("invariants", *SYNTH, *GRIDS),
            ("check", *SYNTH, "--interval", "60", "--delta", "1"),
            ("decompose", *SYNTH, "--delta", "1", "--window", "5000"),
        ]
        for args in runs:
            result = self.invoke(*args, "-o", self.out)
            self.assertEqual(result.exit_code, 0, result.output)
        names = sorted(os.listdir(self.out))
        self.assertIn("summary.txt.meta.json", names)
        for name in names:
            if name.endswith(".json"):
                self.assertIn("run_config", self.load_json(name), name)
            else:
                self.assertIn(name + ".meta.json", names)

    def test_single_point_grid_is_usage_error(self):
        for option in ("--dt-k", "--delta-k"):
            result = self.invoke("scaling", *SYNTH, *GRIDS, option, "1", "-o", self.out)
            self.assertEqual(result.exit_code, 2, option)

    def test_grid_failure_names_point(self):
        ticks = self.path("flat.csv")
        with open(ticks, "w", encoding="utf-8") as f:
            f.write("time,price\n")
            for t in range(2000):
                f.write(f"{t},1.0\n")
        result = self.invoke("scaling", "--input", ticks, *GRIDS, "-o", self.out)
        self.assertEqual(result.exit_code, 1)
        self.assertIn("delta=0.005", result.output)


class TestConfigFile(CliTestCase):

    def test_config_values_and_overrides(self):
        config = self.path("run.cfg")
        with open(config, "w", encoding="utf-8") as f:
            f.write("# synthetic run\nsigma = 1e-3\nn = 20000\nsynth.seed = 3\n")
        result = self.invoke("--config", config, "synth", "--p0", "2", "-o", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        meta = self.load_json("series.csv.meta.json")["run_config"]
        self.assertEqual(meta["seed"], 3)
        self.assertEqual(meta["n"], 20000)
        self.assertEqual(meta["p0"], 2.0)

    def test_read_config_file(self):
        config = self.path("run.cfg")
        with open(config, "w", encoding="utf-8") as f:
            f.write("dt-hi = 30000  # shorter grid\n\nscaling.delta_k = 11\n")
        values = read_config_file(config)
        self.assertEqual(values, {"dt_hi": "30000", "scaling.delta_k": "11"})
        default_map = build_default_map(values, ["scaling", "check"])
        self.assertEqual(default_map["scaling"], {"dt_hi": "30000", "delta_k": "11"})
        self.assertEqual(default_map["check"], {"dt_hi": "30000"})

    def test_bad_config_line(self):
        config = self.path("run.cfg")
        with open(config, "w", encoding="utf-8") as f:
            f.write("sigma 1e-3\n")
        with self.assertRaises(ValueError):
            read_config_file(config)

    def test_run_config_requires_one_source(self):
        with self.assertRaises(ValueError):
            RunConfig().validate()
        with self.assertRaises(ValueError):
            RunConfig(input="ticks.csv", sigma=1e-3).validate()
        self.assertTrue(RunConfig(sigma=1e-3).validate().is_synthetic)


if __name__ == '__main__':
    unittest.main()
