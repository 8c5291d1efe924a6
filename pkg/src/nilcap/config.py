"""Runtime settings.

Values are resolved from environment variables first, then from
~/.nilcap/config.json, then from built-in defaults.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from nilcap.exceptions import OutOfRangeError

logger = logging.getLogger(__name__)

_CONFIG_PATH = Path.home() / ".nilcap" / "config.json"

DEFAULT_MAX_ENUM = 2**20
DEFAULT_MAX_BASIS = 50_000
DEFAULT_CACHE_DIR = Path.home() / ".cache" / "nilcap"


@dataclass(frozen=True)
class Settings:
    """Resolved settings.

    Args:
        max_enum: Largest group order that may be enumerated element by element.
        max_basis: Largest Hall basis that generate_basis will build.
        cache_dir: Directory holding cached presentations.
    """

    max_enum: int = DEFAULT_MAX_ENUM
    max_basis: int = DEFAULT_MAX_BASIS
    cache_dir: Path = DEFAULT_CACHE_DIR


def _is_real_value(val: str | None) -> bool:
    """Check if an env var value is set and not a template placeholder."""
    if not val:
        return False
    return not val.startswith("${")


def _load_config(path: Path | None = None) -> dict:
    """Load the JSON config file if it exists."""
    path = path or _CONFIG_PATH
    try:
        if path.exists():
            return json.loads(path.read_text())
    except (json.JSONDecodeError, OSError) as exc:
        logger.warning("ignoring unreadable config %s: %s", path, exc)
    return {}


def _resolve(env_var: str, config_key: str, config: dict) -> str:
    """Resolve a setting: env var first (skip placeholders), then config file."""
    val = os.environ.get(env_var, "")
    if _is_real_value(val):
        return val
    found = config.get(config_key, "")
    return str(found) if found != "" else ""


def _positive_int(name: str, raw: str, default: int) -> int:
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise OutOfRangeError(name, raw, "expected an integer") from None
    if value < 1:
        raise OutOfRangeError(name, value, "must be positive")
    return value


def load_settings(config_path: Path | None = None) -> Settings:
    """Build Settings from the environment and the optional config file."""
    config = _load_config(config_path)
    max_enum = _positive_int(
        "NILCAP_MAX_ENUM", _resolve("NILCAP_MAX_ENUM", "maxEnum", config), DEFAULT_MAX_ENUM
    )
    max_basis = _positive_int(
        "NILCAP_MAX_BASIS", _resolve("NILCAP_MAX_BASIS", "maxBasis", config), DEFAULT_MAX_BASIS
    )
    cache_dir = _resolve("NILCAP_CACHE_DIR", "cacheDir", config)
    return Settings(
        max_enum=max_enum,
        max_basis=max_basis,
        cache_dir=Path(cache_dir).expanduser() if cache_dir else DEFAULT_CACHE_DIR,
    )
