import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "HYPALG_CACHE_DIR"

DEFAULTS: Dict[str, Any] = {
    "abs_tol": 1e-10,
    "rel_tol": 1e-10,
    "max_refinements": 6,
    "node_rule": "gauss-legendre-composite",
    "sigma_max": 40.0,
    "n_sigma": 400,
    "threads": None,
    "output_format": "csv",
    "cache_dir": None,
}


class HypalgConfig:
    """Manages hypalg configuration stored in a JSON file."""

    def __init__(self, config_dir: Path):
        """Initialize configuration manager.

        Args:
            config_dir: The directory where configuration files are stored (~/.hypalg).
        """
        self.config_dir = config_dir
        self.config_dir.mkdir(parents=True, exist_ok=True)
        self.config_file_path = self.config_dir / "config.json"
        self.config_data: Dict = {}
        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from the JSON file, resetting it if corrupted."""
        if self.config_file_path.exists():
            try:
                with open(self.config_file_path, "r", encoding="utf-8") as f:
                    self.config_data = json.load(f)
                if not isinstance(self.config_data, dict):
                    logger.warning(f"Config file {self.config_file_path} does not contain a JSON object. Resetting.")
                    self.config_data = {}
            except json.JSONDecodeError:
                logger.error(
                    f"Error decoding JSON from config file {self.config_file_path}. Resetting config.",
                    exc_info=True,
                )
                self.config_data = {}
        else:
            logger.debug(f"Config file {self.config_file_path} not found. Using defaults.")
            self.config_data = {}

    def _save_config(self) -> None:
        self.config_dir.mkdir(parents=True, exist_ok=True)
        with open(self.config_file_path, "w", encoding="utf-8") as f:
            json.dump(self.config_data, f, indent=4, sort_keys=True)
        logger.debug(f"Saved configuration to {self.config_file_path}")

    def get(self, key: str) -> Any:
        if key not in DEFAULTS:
            raise KeyError(f"Unknown configuration key '{key}'.")
        return self.config_data.get(key, DEFAULTS[key])

    def as_dict(self) -> Dict[str, Any]:
        values = {key: self.get(key) for key in DEFAULTS}
        values["cache_dir"] = str(self.get_cache_dir())
        return values

    def set(self, key: str, raw_value: str) -> Any:
        """Validate and store one key given as a string (as typed on the command line).

        Raises:
            ValueError: for unknown keys or invalid values.
        """
        if key not in DEFAULTS:
            raise ValueError(f"Unknown configuration key '{key}'. Known keys: {', '.join(sorted(DEFAULTS))}.")
        value = _parse(key, raw_value)
        self.config_data[key] = value
        self._save_config()
        logger.info(f"Configuration '{key}' set to: {value}")
        return value

    def get_cache_dir(self) -> Path:
        """Structure-table cache directory; HYPALG_CACHE_DIR wins over the file."""
        env_value = os.environ.get(CACHE_DIR_ENV)
        if env_value:
            return Path(env_value)
        stored = self.config_data.get("cache_dir")
        if stored:
            return Path(stored)
        return self.config_dir / "cache"

    def get_threads(self) -> int:
        threads = self.get("threads")
        return threads if threads else (os.cpu_count() or 1)

    def quadrature_spec(self, abs_tol: Optional[float] = None, rel_tol: Optional[float] = None):
        from .numerics import QuadratureSpec

        return QuadratureSpec(
            abs_tol=abs_tol if abs_tol is not None else self.get("abs_tol"),
            rel_tol=rel_tol if rel_tol is not None else self.get("rel_tol"),
            max_refinements=self.get("max_refinements"),
            node_rule=self.get("node_rule"),
        )

    def sigma_grid(self, sigma_max: Optional[float] = None, n_sigma: Optional[int] = None):
        from .plancherel import SigmaGrid

        return SigmaGrid(
            sigma_max=sigma_max if sigma_max is not None else self.get("sigma_max"),
            n_sigma=n_sigma if n_sigma is not None else self.get("n_sigma"),
        )


def _parse(key: str, raw_value: str) -> Any:
    if key in ("abs_tol", "rel_tol", "sigma_max"):
        try:
            value = float(raw_value)
        except ValueError:
            raise ValueError(f"{key} must be a number, got '{raw_value}'.")
        if not value > 0:
            raise ValueError(f"{key} must be positive.")
        return value
    if key in ("max_refinements", "n_sigma", "threads"):
        try:
            value = int(raw_value)
        except ValueError:
            raise ValueError(f"{key} must be an integer, got '{raw_value}'.")
        if value < 1:
            raise ValueError(f"{key} must be at least 1.")
        return value
    if key == "node_rule":
        from .numerics import NODE_RULES

        if raw_value not in NODE_RULES:
            raise ValueError(f"node_rule must be one of {', '.join(NODE_RULES)}.")
        return raw_value
    if key == "output_format":
        if raw_value not in ("csv", "json"):
            raise ValueError("output_format must be 'csv' or 'json'.")
        return raw_value
    if not raw_value:
        raise ValueError("cache_dir must be a non-empty path.")
    return str(Path(raw_value).expanduser())
