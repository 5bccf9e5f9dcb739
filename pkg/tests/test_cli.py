import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pandas as pd

from cli import main
from model.network_spec import NetworkSpec
from tropical.polynomial import tropical_line


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        status = main(list(argv))
    return status, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def write_json(self, name: str, data) -> str:
        with open(self.path(name), "w") as f:
            json.dump(data, f)
        return self.path(name)

    def test_help(self):
        status, out, _ = run("--help")
        self.assertEqual(status, 0)
        self.assertIn("experiment", out)

    def test_unknown_flag(self):
        status, _, err = run("eval", "--spec", "a.json", "--data", "b.csv", "--bogus")
        self.assertEqual(status, 1)
        self.assertTrue(err.startswith("ERROR E_FLAG"))

    def test_missing_input(self):
        status, _, err = run("eval", "--spec", self.path("missing.json"), "--data", self.path("missing.csv"))
        self.assertEqual(status, 1)
        self.assertTrue(err.startswith("ERROR E_INPUT"))

    def test_compile_then_eval(self):
        poly = self.write_json("poly.json", {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]})
        spec_path = self.path("out/spec.json")
        status, _, err = run("compile", "convex", "--in", poly, "--kappa", "30", "--out", spec_path)
        self.assertEqual(status, 0, msg=err)
        spec = NetworkSpec.load(spec_path)
        self.assertEqual(spec.widths, [2, 4, 1])

        pd.DataFrame({"x1": [0.5, 2.0], "x2": [0.5, 0.5], "y": [1, 0]}).to_csv(self.path("pts.csv"), index=False)
        status, out, err = run("eval", "--spec", spec_path, "--data", self.path("pts.csv"),
                               "--out", self.path("pred.csv"))
        self.assertEqual(status, 0, msg=err)
        payload = json.loads(out)
        self.assertEqual(payload["format_version"], 1)
        self.assertEqual(payload["metrics"]["auc"], 1.0)
        self.assertEqual(payload["metrics"]["iou"], 1.0)
        pred = pd.read_csv(self.path("pred.csv"))
        self.assertEqual(list(pred["decision"]), [1, 0])
        self.assertTrue(np.isclose(pred["logit"][0] + spec.tau, 4.0, atol=1e-5))

    def test_eval_unlabeled(self):
        poly = self.write_json("poly.json", {"center": [0, 0], "radius": 1.0, "m": 8})
        run("compile", "convex", "--in", poly, "--kappa", "10", "--out", self.path("spec.json"))
        pd.DataFrame({"x1": [0.0], "x2": [0.0]}).to_csv(self.path("pts.csv"), index=False)
        status, out, _ = run("eval", "--spec", self.path("spec.json"), "--data", self.path("pts.csv"))
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out), {"format_version": 1, "n": 1})

    def test_compile_is_byte_identical(self):
        comps = {"components": [{"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
                                {"vertices": [[2, 0], [3, 0], [3, 1], [2, 1]]}]}
        poly = self.write_json("union.json", comps)
        for name in ("a.json", "b.json"):
            status, _, err = run("compile", "union", "--in", poly, "--kappa", "30", "--out", self.path(name))
            self.assertEqual(status, 0, msg=err)
        with open(self.path("a.json"), "rb") as a, open(self.path("b.json"), "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_compile_needs_kappa(self):
        poly = self.write_json("poly.json", {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]})
        status, _, err = run("compile", "convex", "--in", poly, "--out", self.path("spec.json"))
        self.assertEqual(status, 1)
        self.assertIn("E_FLAG", err)

    def test_trop_eval_and_duality(self):
        poly = self.write_json("line.json", tropical_line((0, 0)).to_dict())
        status, out, _ = run("trop", "eval", "--in", poly, "--x", "2", "1")
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["value"], 2.0)

        status, out, _ = run("trop", "duality-check", "--random", "5", "--seed", "3", "--grid", "64")
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["mismatches"], 0)

        status, out, _ = run("trop", "dual", "--in", poly, "--ppm", self.path("curve.ppm"), "--grid", "64")
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["interior_edges"], 0)
        with open(self.path("curve.ppm"), "rb") as f:
            self.assertTrue(f.read().startswith(b"P6\n64 64\n255\n"))

    def test_ls1d_target(self):
        status, out, _ = run("compile", "ls1d", "--target", "rectangle", "--out", self.path("rect.json"))
        self.assertEqual(status, 0)
        payload = json.loads(out)
        self.assertGreaterEqual(payload["accuracy"], 0.99)
        self.assertEqual(len(payload["alpha"]), 3)

    def test_train_and_render(self):
        poly = self.write_json("poly.json", {"vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]})
        run("compile", "convex", "--in", poly, "--kappa", "5", "--out", self.path("spec.json"))
        x = np.random.default_rng(0).uniform(-2, 2, size=(200, 2))
        pd.DataFrame({"x1": x[:, 0], "x2": x[:, 1], "y": (np.abs(x).max(axis=1) <= 1).astype(int)}) \
            .to_csv(self.path("train.csv"), index=False)
        status, _, err = run("train", "--spec", self.path("spec.json"), "--data", self.path("train.csv"),
                             "--epochs", "2", "--batch", "50", "--out", self.path("trained.json"),
                             "--curve", self.path("curve.csv"))
        self.assertEqual(status, 0, msg=err)
        self.assertEqual(len(pd.read_csv(self.path("curve.csv"))), 2)

        status, _, err = run("render", "--spec", self.path("trained.json"), "--grid", "20",
                             "--ppm", self.path("maps/map.ppm"), "--contour", self.path("maps/contour.csv"))
        self.assertEqual(status, 0, msg=err)
        self.assertEqual(os.path.getsize(self.path("maps/map.ppm")), len(b"P6\n20 20\n255\n") + 20 * 20 * 3)

    def test_print_config(self):
        status, out, _ = run("train", "--spec", "s.json", "--data", "d.csv", "--out", "o.json", "--lr", "0.01",
                             "--print-config")
        self.assertEqual(status, 0)
        flags = json.loads(out)["flags"]
        self.assertEqual((flags["lr"], flags["epochs"], flags["batch"]), (0.01, 80, 512))

        status, out, _ = run("experiment", "--case", "double", "--seed", "7", "--print-config")
        self.assertEqual(status, 0)
        experiment = json.loads(out)["flags"]["experiment"]
        self.assertEqual((experiment["case"], experiment["seed"]), ("double", 7))


if __name__ == '__main__':
    unittest.main()
