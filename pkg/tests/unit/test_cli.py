import json
import math
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from click.testing import CliRunner

from hypalg.algebra import AlgebraElement
from hypalg.cli import cli
from hypalg.config import CACHE_DIR_ENV, HypalgConfig
from hypalg.exceptions import NonConvergence
from hypalg.losert_basis import LosertIndex
from hypalg.tables import table_cache_path


def data_lines(output):
    return [line for line in output.splitlines() if line and not line.startswith("#")]


def element(a, m, n, k):
    return json.dumps(AlgebraElement.generator(a, LosertIndex.of(m, n, k)).to_dict())


class TestCli(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cache_dir = tempfile.mkdtemp()

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.cache_dir)

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.config = HypalgConfig(self.temp_dir / ".hypalg")
        self.config_patch = patch('hypalg.cli.config_instance', self.config)
        self.config_patch.start()
        self.env_patch = patch.dict(os.environ, {CACHE_DIR_ENV: self.cache_dir})
        self.env_patch.start()
        self.runner = CliRunner()

    def tearDown(self):
        self.env_patch.stop()
        self.config_patch.stop()
        shutil.rmtree(self.temp_dir)

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args))

    # --- eval ---

    def test_help_without_command(self):
        result = self.invoke()
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("eval", result.output)
        self.assertIn("bracket", result.output)

    def test_eval_losert_grid_csv(self):
        result = self.invoke("eval", "--losert", "--grid", "x:1:10:50")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("# schema=hypalg-eval/1", result.output)
        self.assertIn("# provenance=jacobi-closed-form", result.output)
        lines = data_lines(result.output)
        self.assertEqual(lines[0], "x,re,im,error")
        self.assertEqual(len(lines), 51)
        first = lines[1].split(",")
        self.assertEqual(float(first[0]), 1.0)
        # Phi_{0,0,0} = 2/(x+1) / sqrt(2) at x = 1
        self.assertAlmostEqual(float(first[1]), 1 / math.sqrt(2), places=12)
        self.assertEqual(first[3], "")

    def test_eval_matrix_element_at_point(self):
        result = self.invoke(
            "eval", "--matrix-element", "discrete+", "--lambda", "1", "-n", "1", "-m", "1",
            "--at", "0,0,0", "--format", "json",
        )
        self.assertEqual(result.exit_code, 0, msg=result.output)
        document = json.loads(result.output)
        self.assertEqual(document["columns"], ["rho", "phi1", "phi2", "re", "im", "error"])
        self.assertAlmostEqual(document["rows"][0][3], math.sqrt(2), places=12)
        self.assertEqual(document["meta"]["lambda"], 1.0)

    def test_eval_disk_basis(self):
        result = self.invoke("eval", "--disk-basis", "--at", "0.5,0", "--format", "json")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertAlmostEqual(json.loads(result.output)["rows"][0][2], 0.75, places=12)

    def test_eval_writes_file(self):
        output = self.temp_dir / "out" / "disk.csv"
        result = self.invoke("eval", "--disk-matrix-element", "--sigma", "1", "--grid", "r:0:0.9:10", "-o", str(output))
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertEqual(result.output, "")
        lines = data_lines(output.read_text())
        self.assertEqual(lines[0], "r,re,im,error")
        self.assertEqual(len(lines), 11)
        self.assertAlmostEqual(float(lines[1].split(",")[1]), 1.0, places=12)

    def test_eval_format_from_config(self):
        self.config.set("output_format", "json")
        result = self.invoke("eval", "--losert", "-m", "1", "-n", "2", "-k", "1", "--at", "0.3,0.1,0.2")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertEqual(json.loads(result.output)["schema"], "hypalg-eval/1")

    def test_eval_reports_failed_rows(self):
        result = self.invoke(
            "eval", "--bargmann", "--lambda", "1", "-n", "1", "--at", "0.5,0", "--at", "1.2,0", "--format", "json"
        )
        self.assertEqual(result.exit_code, 0, msg=result.output)
        rows = json.loads(result.output)["rows"]
        self.assertAlmostEqual(rows[0][2], math.sqrt(2) * 0.5, places=12)
        self.assertEqual(rows[0][4], "")
        self.assertIsNone(rows[1][2])
        self.assertTrue(rows[1][4].startswith("DomainError"))

    def test_eval_usage_errors(self):
        cases = [
            ["eval", "--losert"],
            ["eval", "--grid", "x:1:2:3"],
            ["eval", "--losert", "--grid", "q:1:2:3"],
            ["eval", "--losert", "--grid", "x:0:2:3"],
            ["eval", "--matrix-element", "principal", "--at", "0.1"],
            ["eval", "--disk-basis", "--grid", "rho:0:1:3"],
            ["eval", "--losert", "--matrix-element", "principal", "--at", "0.1"],
        ]
        for args in cases:
            result = self.invoke(*args)
            self.assertEqual(result.exit_code, 2, msg=f"{args}: {result.output}")

    # --- config ---

    def test_config_set_and_show(self):
        result = self.invoke("config", "set", "abs_tol", "1e-8")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("abs_tol set to: 1e-08", result.output)
        result = self.invoke("config", "show")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("abs_tol: 1e-08", result.output)
        self.assertIn(f"cache_dir: {self.cache_dir}", result.output)
        self.assertIn("threads: default", result.output)

    def test_config_set_rejects_unknown_key(self):
        result = self.invoke("config", "set", "sigma_min", "x")
        self.assertEqual(result.exit_code, 2)
        self.assertIn("Unknown configuration key", result.output)

    # --- tables ---

    def test_tables_build_and_cache(self):
        output = self.temp_dir / "table.json"
        result = self.invoke("tables", "--window", "1,1,2", "-o", str(output))
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("Structure table for window (1, 1, 2):", result.output)
        self.assertIn("Checksum:", result.output)
        self.assertTrue(output.exists())
        self.assertTrue(table_cache_path(self.cache_dir, (1, 1, 2), 1e-8).exists())

        result = self.invoke("tables", "--load", str(output))
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn(f"Source: {output}", result.output)

    def test_tables_refuses_tampered_file(self):
        output = self.temp_dir / "table.json"
        self.assertEqual(self.invoke("tables", "--window", "1,1,2", "-o", str(output)).exit_code, 0)
        document = json.loads(output.read_text())
        document["checksum"] = "0" * 64
        output.write_text(json.dumps(document))
        result = self.invoke("tables", "--load", str(output))
        self.assertEqual(result.exit_code, 1, msg=result.output)
        self.assertIn("Refusing", result.output)

    def test_tables_bad_window(self):
        for window in ["1,1", "0.3,1,2", "1,1,-1"]:
            result = self.invoke("tables", "--window", window)
            self.assertEqual(result.exit_code, 2, msg=window)

    # --- bracket ---

    def test_bracket_central_term(self):
        result = self.invoke("bracket", element(0, 0, 1, 0), element(0, 0, -1, 0), "--window", "1,1,2")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        document = json.loads(result.output)
        self.assertFalse(document["partial"])
        self.assertEqual(document["algebra"], "su2")
        self.assertAlmostEqual(abs(complex(*document["central_value"])), 2.0, places=12)

    def test_bracket_from_file(self):
        path = self.temp_dir / "x.json"
        path.write_text(element(0, 0, 0, 0))
        result = self.invoke("bracket", str(path), element(1, 0, 0, 1), "--window", "1,1,2")
        self.assertEqual(result.exit_code, 0, msg=result.output)
        result_element = AlgebraElement.from_dict(json.loads(result.output)["result"])
        self.assertTrue(all(a == 2 for a, _ in result_element.terms))

    def test_bracket_overflow_prints_partial(self):
        x = json.dumps(
            (AlgebraElement.generator(0, LosertIndex.of(1, 1, 0)) + AlgebraElement.generator(0, LosertIndex.of(0, 0, 0))).to_dict()
        )
        result = self.invoke("bracket", x, element(1, 1, 1, 0), "--window", "1,1,2")
        self.assertEqual(result.exit_code, 2, msg=result.output)
        self.assertIn('"partial": true', result.output)
        self.assertIn("Error:", result.output)

    def test_bracket_bad_input(self):
        self.assertEqual(self.invoke("bracket", "not json", element(0, 0, 0, 0)).exit_code, 2)
        result = self.invoke("bracket", element(0, 0, 0, 0), element(1, 0, 0, 0), "--algebra", str(self.temp_dir / "none.json"))
        self.assertEqual(result.exit_code, 2, msg=result.output)

    # --- verify ---

    def test_verify_writes_report(self):
        output = self.temp_dir / "report.json"
        result = self.invoke("verify", "orthonormality", "--window", "1,1,2", "-o", str(output))
        self.assertEqual(result.exit_code, 0, msg=result.output)
        report = json.loads(output.read_text())
        self.assertEqual(report["schema"], "hypalg-verify/1")
        self.assertTrue(report["pass"])

    def test_verify_failure_exit_code(self):
        result = self.invoke("verify", "casimir", "--window", "1,1,1", "--samples", "2", "--tol", "1e-16")
        self.assertEqual(result.exit_code, 1, msg=result.output)
        self.assertIn("failed", result.output)

    def test_verify_unknown_suite(self):
        self.assertEqual(self.invoke("verify", "nothing").exit_code, 2)

    def test_verify_non_convergence_exit_code(self):
        with patch('hypalg.cli.run_suite', side_effect=NonConvergence("refinement budget exhausted")):
            result = self.invoke("verify", "plancherel")
        self.assertEqual(result.exit_code, 3, msg=result.output)
        self.assertIn("Error: refinement budget exhausted", result.output)

    # --- threads ---

    def test_tables_do_not_depend_on_thread_count(self):
        outputs = []
        for threads in ("1", "4"):
            result = self.invoke("--threads", threads, "tables", "--window", "1,1,2", "--no-cache")
            self.assertEqual(result.exit_code, 0, msg=result.output)
            outputs.append(result.output)
        self.assertEqual(outputs[0], outputs[1])
        self.assertIn("Source: built", outputs[0])

    def test_plancherel_report_does_not_depend_on_thread_count(self):
        reports = []
        for threads in ("1", "3"):
            result = self.invoke(
                "--threads", threads, "verify", "plancherel",
                "--window", "1,1,0", "--sigma-max", "10", "--n-sigma", "40", "--tol", "1",
            )
            self.assertEqual(result.exit_code, 0, msg=result.output)
            reports.append(json.loads(result.output))
        self.assertEqual(reports[0]["max_residual"], reports[1]["max_residual"])
        self.assertEqual(reports[0]["details"], reports[1]["details"])


if __name__ == '__main__':
    unittest.main()
