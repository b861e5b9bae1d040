#!/usr/bin/env python3
"""End-to-end checks of the wcp command-line runner.

usage: cli_test.py PATH_TO_WCP
"""

import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

WCP = None


def run(config, out_dir, *extra, env=None):
    cfg_path = Path(out_dir).parent / (Path(out_dir).name + ".json")
    if isinstance(config, dict):
        cfg_path.write_text(json.dumps(config))
    else:
        cfg_path = Path(config)
    args = [WCP, "run", str(cfg_path)]
    if out_dir is not None:
        args += ["--output-dir", str(out_dir)]
    return subprocess.run(args + list(extra), capture_output=True, text=True, env=env)


class Cli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_bounds_lambda_e_lower(self):
        out = self.tmp / "bounds"
        r = run({"command": "bounds", "n": 4, "dist": {"kind": "constant", "value": 1}}, out)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(json.loads((out / "bounds.json").read_text())["lambda_e_lower"], 0.2)

    def test_gw_extinction(self):
        out = self.tmp / "gw"
        r = run({"command": "gw", "n": 2, "p": 0.75}, out)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertAlmostEqual(json.loads((out / "gw.json").read_text())["extinction"], 1 / 9, delta=1e-12)

    def test_malformed_dist_writes_only_diagnostics(self):
        out = self.tmp / "bad"
        r = run({"command": "bounds", "n": 4, "dist": {"kind": "uniform", "a": 2, "b": 1}}, out)
        self.assertEqual(r.returncode, 2)
        self.assertEqual(sorted(p.name for p in out.iterdir()), ["diagnostics.json"])
        self.assertEqual(json.loads((out / "diagnostics.json").read_text())["error"], "validation")

    def test_unknown_key_rejected(self):
        out = self.tmp / "typo"
        r = run({"command": "gw", "n": 2, "p": 0.75, "replicats": 10}, out)
        self.assertEqual(r.returncode, 2)
        self.assertIn("replicats", (out / "diagnostics.json").read_text())

    def test_unknown_command_and_missing_key(self):
        self.assertEqual(run({"command": "frobnicate"}, self.tmp / "a").returncode, 2)
        self.assertEqual(run({"command": "gw", "n": 2}, self.tmp / "b").returncode, 2)

    def test_manifest_round_trip_and_thread_invariance(self):
        cfg = {"command": "survival", "seed": 4, "n": 3, "horizon": 4.0, "depth": 8,
               "dist": {"kind": "bernoulli", "p": 0.8}, "lambda_grid": [0.3, 0.6], "replicates": 300}
        first, second, third = self.tmp / "s1", self.tmp / "s2", self.tmp / "s3"
        self.assertEqual(run(cfg, first, "--threads", "1").returncode, 0)
        manifest = json.loads((first / "manifest.json").read_text())
        self.assertEqual(manifest["crn"], False)
        self.assertEqual(manifest["max_active"], 1000000)
        self.assertIn("toolkit_version", manifest)
        r = run(first / "manifest.json", second, "--threads", "2")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(run(cfg, third, "--threads", "3").returncode, 0)
        csv1 = (first / "survival_curve.csv").read_bytes()
        self.assertEqual(csv1, (second / "survival_curve.csv").read_bytes())
        self.assertEqual(csv1, (third / "survival_curve.csv").read_bytes())
        header = csv1.decode().splitlines()[0]
        self.assertEqual(header, "lambda,mode,p_hat,se,reps,escapes,capacity_errors")

    def test_insufficient_signal_exit_code(self):
        out = self.tmp / "decay"
        r = run({"command": "decay", "lambda": 0.0, "t_grid": [40, 50, 60], "replicates": 50}, out)
        self.assertEqual(r.returncode, 4)
        self.assertEqual(json.loads((out / "decay.json").read_text())["status"], "insufficient-signal")

    def test_infinite_verdict(self):
        out = self.tmp / "crit"
        r = run({"command": "critical", "n": 2, "dist": {"kind": "bernoulli", "p": 0.5}}, out)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(json.loads((out / "critical.json").read_text())["verdict"], "infinite")

    def test_capacity_exit_code(self):
        out = self.tmp / "cap"
        r = run({"command": "simulate", "n": 5, "lambda": 2.0, "horizon": 50.0, "depth": 30,
                 "max_active": 50, "record_series": False}, out)
        self.assertEqual(r.returncode, 3)
        self.assertEqual(json.loads((out / "result.json").read_text())["status"], "capacity_exceeded")
        self.assertTrue((out / "diagnostics.json").exists())

    def test_event_log_and_env_output_dir(self):
        env = dict(os.environ, WCP_OUTPUT_DIR=str(self.tmp / "from_env"))
        cfg = self.tmp / "sim.json"
        cfg.write_text(json.dumps({"command": "simulate", "seed": 2, "n": 2, "lambda": 0.5, "horizon": 3.0,
                                   "depth": 5, "log_events": True}))
        r = subprocess.run([WCP, "run", str(cfg)], capture_output=True, text=True, env=env)
        self.assertEqual(r.returncode, 0, r.stderr)
        lines = (self.tmp / "from_env" / "events.csv").read_text().splitlines()
        self.assertEqual(lines[0], "time,vertex,event")
        self.assertEqual(lines[1], '0,"O",infect')

    def test_rwalk_check(self):
        out = self.tmp / "rw"
        r = run({"command": "rwalk-check", "max_steps": 20}, out)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue(json.loads((out / "rwalk.json").read_text())["holds"])


if __name__ == "__main__":
    WCP = sys.argv.pop(1)
    unittest.main()
