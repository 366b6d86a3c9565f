import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml


logger = logging.getLogger(__name__)

CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.yaml"

CHERNOFF_MODES = {"exact", "simplified"}


def _load_config(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Config file not found at {path}")
    with path.open("r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    if not isinstance(data, dict):
        raise ValueError("config.yaml must contain a mapping at the top level.")
    return data


def _resolve_path(value: str, base_dir: Path) -> Path:
    path = Path(value).expanduser()
    if not path.is_absolute():
        path = base_dir / path
    return path


@dataclass
class Settings:
    data_dir: Path = Path("data")
    output_dir: Path = Path("output")
    log_level: str = "INFO"
    seed: int = 2011
    trials: int = 200

    # Disjunctness oracle guard
    disjunct_max_cols: int = 25
    disjunct_max_k: int = 4

    # Design sweep grid
    alpha_min: float = 0.01
    alpha_max: float = 2.0
    alpha_step: float = 0.01
    delta_step: float = 0.001
    chernoff_mode: str = "exact"

    def __post_init__(self) -> None:
        if self.chernoff_mode not in CHERNOFF_MODES:
            raise ValueError(f"chernoff_mode must be one of {sorted(CHERNOFF_MODES)}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer.")
        if self.trials < 1:
            raise ValueError("trials must be at least 1.")
        if not 0 < self.alpha_min <= self.alpha_max:
            raise ValueError("alpha grid requires 0 < alpha_min <= alpha_max.")
        if self.alpha_step <= 0 or self.delta_step <= 0:
            raise ValueError("alpha_step and delta_step must be positive.")

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "Settings":
        explicit = os.getenv("GROUPTEST_CONFIG")
        if path is None:
            path = Path(explicit).expanduser() if explicit else CONFIG_PATH
        if not path.exists() and not explicit:
            logger.warning("Config file not found at %s; using built-in defaults", path)
            data: dict[str, Any] = {}
        else:
            data = _load_config(path)
        base_dir = path.parent

        def _get(key: str, default: Any = None) -> Any:
            value = data.get(key)
            return default if value is None else value

        def _dir(env: str, key: str, fallback: str) -> Path:
            value = os.getenv(env) or _get(key)
            if value is None:
                return base_dir / fallback
            return _resolve_path(str(value), base_dir)

        seed = os.getenv("GROUPTEST_SEED") or _get("seed", cls.seed)

        return cls(
            data_dir=_dir("GROUPTEST_DATA_DIR", "data_dir", "data"),
            output_dir=_dir("GROUPTEST_OUTPUT_DIR", "output_dir", "output"),
            log_level=str(os.getenv("GROUPTEST_LOG_LEVEL") or _get("log_level", cls.log_level)).upper(),
            seed=int(seed),
            trials=int(_get("trials", cls.trials)),
            disjunct_max_cols=int(_get("disjunct_max_cols", cls.disjunct_max_cols)),
            disjunct_max_k=int(_get("disjunct_max_k", cls.disjunct_max_k)),
            alpha_min=float(_get("alpha_min", cls.alpha_min)),
            alpha_max=float(_get("alpha_max", cls.alpha_max)),
            alpha_step=float(_get("alpha_step", cls.alpha_step)),
            delta_step=float(_get("delta_step", cls.delta_step)),
            chernoff_mode=str(_get("chernoff_mode", cls.chernoff_mode)),
        )

    def ensure_data_dir(self) -> Path:
        path = Path(self.data_dir).expanduser()
        path.mkdir(parents=True, exist_ok=True)
        return path

    def ensure_output_dir(self) -> Path:
        path = Path(self.output_dir).expanduser()
        path.mkdir(parents=True, exist_ok=True)
        return path

    def output_path(self, name: str) -> Path:
        """Default location of a generated file."""
        return self.ensure_output_dir() / name


settings = Settings.load()
