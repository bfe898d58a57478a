import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parent.parent / "config" / "settings.yml"


@dataclass
class AppConfig:
    settings: Dict[str, Any]

    @classmethod
    def load(cls, settings_path: Optional[Path] = None) -> "AppConfig":
        return cls(settings=load_yaml(Path(settings_path or DEFAULT_SETTINGS_PATH)))

    def max_denominator_bits(self) -> int:
        return int(self.settings.get("search", {}).get("max_denominator_bits", 64))

    def default_dim(self) -> int:
        return int(self.settings.get("cli", {}).get("dim", 4))

    def default_output(self) -> str:
        return str(self.settings.get("cli", {}).get("output", "human"))


def load_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Config file missing: {path}")
    with path.open() as f:
        content = f.read()
    return yaml.safe_load(content) or {}


def setup_logging(config: Dict[str, Any], level_override: Optional[str] = None) -> None:
    level = (level_override or config.get("logging", {}).get("level", "WARNING")).upper()
    handlers: list = [logging.StreamHandler(sys.stderr)]
    log_file = config.get("logging", {}).get("log_file")
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(path))
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )
