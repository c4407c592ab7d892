"""Application configuration loader."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent
CONFIG_PATH = BASE_DIR / "config.yaml"

load_dotenv()


@dataclass(frozen=True)
class Settings:
    order: int
    fc_order: int
    r_values: Tuple[Fraction, ...]
    workers: int
    family_file: Optional[str]
    log_level: str


def _read_yaml_config(path: Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    with path.open("r", encoding="utf-8") as file:
        return yaml.safe_load(file) or {}


def _parse_r_values(raw: Any) -> Tuple[Fraction, ...]:
    if isinstance(raw, (list, tuple)):
        items = [str(item) for item in raw]
    else:
        items = str(raw).split(",")
    return tuple(Fraction(item.strip()) for item in items if item.strip())


def load_settings(config_path: Path = CONFIG_PATH) -> Settings:
    yaml_config = _read_yaml_config(config_path)

    order = os.getenv("HYPERCHECK_ORDER") or yaml_config.get("HYPERCHECK_ORDER") or 12
    fc_order = os.getenv("HYPERCHECK_FC_ORDER") or yaml_config.get("HYPERCHECK_FC_ORDER") or 8
    r_values = os.getenv("HYPERCHECK_R_VALUES") or yaml_config.get("HYPERCHECK_R_VALUES") or "1/3,2/5,3/7"
    workers = os.getenv("HYPERCHECK_WORKERS") or yaml_config.get("HYPERCHECK_WORKERS") or os.cpu_count() or 1
    family_file = os.getenv("HYPERCHECK_FAMILY_FILE") or yaml_config.get("HYPERCHECK_FAMILY_FILE") or None
    log_level = os.getenv("LOG_LEVEL") or yaml_config.get("LOG_LEVEL") or "INFO"

    return Settings(
        order=int(order),
        fc_order=int(fc_order),
        r_values=_parse_r_values(r_values),
        workers=max(1, int(workers)),
        family_file=str(family_file) if family_file else None,
        log_level=str(log_level).upper(),
    )


settings = load_settings()
