import json
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from hypalg.config import CACHE_DIR_ENV, DEFAULTS, HypalgConfig
from hypalg.numerics import QuadratureSpec
from hypalg.plancherel import SigmaGrid


class TestHypalgConfig(unittest.TestCase):

    def setUp(self):
        self.config_dir = Path(tempfile.mkdtemp()) / ".hypalg"
        self.env = patch.dict(os.environ, {}, clear=False)
        self.env.start()
        os.environ.pop(CACHE_DIR_ENV, None)

    def tearDown(self):
        self.env.stop()
        shutil.rmtree(self.config_dir.parent)

    def test_defaults(self):
        config = HypalgConfig(self.config_dir)
        self.assertTrue(self.config_dir.exists())
        for key, value in DEFAULTS.items():
            self.assertEqual(config.get(key), value)
        self.assertEqual(config.get_cache_dir(), self.config_dir / "cache")
        self.assertEqual(config.quadrature_spec(), QuadratureSpec())
        self.assertEqual(config.sigma_grid(), SigmaGrid())

    def test_unknown_key(self):
        config = HypalgConfig(self.config_dir)
        with self.assertRaises(KeyError):
            config.get("sigma_min")
        with self.assertRaises(ValueError):
            config.set("sigma_min", "x")

    def test_set_persists(self):
        config = HypalgConfig(self.config_dir)
        self.assertEqual(config.set("abs_tol", "1e-8"), 1e-8)
        self.assertEqual(config.set("n_sigma", "200"), 200)
        self.assertEqual(config.set("node_rule", "tanh-sinh"), "tanh-sinh")
        reloaded = HypalgConfig(self.config_dir)
        self.assertEqual(reloaded.get("abs_tol"), 1e-8)
        self.assertEqual(reloaded.sigma_grid().n_sigma, 200)
        self.assertEqual(reloaded.quadrature_spec(abs_tol=1e-6).abs_tol, 1e-6)
        self.assertEqual(reloaded.quadrature_spec().node_rule, "tanh-sinh")

    def test_invalid_values(self):
        config = HypalgConfig(self.config_dir)
        for key, raw in [
            ("abs_tol", "small"),
            ("rel_tol", "-1"),
            ("threads", "0"),
            ("max_refinements", "2.5"),
            ("node_rule", "simpson"),
            ("output_format", "xml"),
            ("cache_dir", ""),
        ]:
            with self.assertRaises(ValueError, msg=key):
                config.set(key, raw)
        self.assertFalse(config.config_file_path.exists())

    def test_corrupt_file_is_reset(self):
        self.config_dir.mkdir(parents=True)
        (self.config_dir / "config.json").write_text("{broken")
        config = HypalgConfig(self.config_dir)
        self.assertEqual(config.config_data, {})
        (self.config_dir / "config.json").write_text(json.dumps([1, 2]))
        self.assertEqual(HypalgConfig(self.config_dir).config_data, {})

    def test_cache_dir_precedence(self):
        config = HypalgConfig(self.config_dir)
        stored = self.config_dir.parent / "stored"
        config.set("cache_dir", str(stored))
        self.assertEqual(config.get_cache_dir(), stored)
        os.environ[CACHE_DIR_ENV] = str(self.config_dir.parent / "from_env")
        self.assertEqual(config.get_cache_dir(), self.config_dir.parent / "from_env")
        self.assertEqual(config.as_dict()["cache_dir"], str(self.config_dir.parent / "from_env"))

    def test_threads(self):
        config = HypalgConfig(self.config_dir)
        self.assertGreaterEqual(config.get_threads(), 1)
        config.set("threads", "3")
        self.assertEqual(config.get_threads(), 3)


if __name__ == '__main__':
    unittest.main()
