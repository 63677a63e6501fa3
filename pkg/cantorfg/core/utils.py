import os
import sys
import json
import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

from cantorfg import version as cantorfg_version
from cantorfg.core.exceptions import SpecError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

SCHEMA = "cantor-fg/1"
SEARCH_BOUND_ENV = "CANTOR_FG_SEARCH_BOUND"


@dataclass(frozen=True)
class Settings:
    """Tunable search bounds and output precision."""
    search_bound: int = 100000
    artin_a: int = 4
    artin_b: int = 24
    unit_box: int = 3
    relation_bound: int = 20
    independence_width: float = 1e-10
    decimal_digits: int = 12

    @classmethod
    def from_env(cls, base: Optional["Settings"] = None) -> "Settings":
        """Apply CANTOR_FG_SEARCH_BOUND on top of ``base`` (defaults when omitted)."""
        base = base or cls()
        raw = os.environ.get(SEARCH_BOUND_ENV)
        if raw is None:
            return base
        try:
            bound = int(raw)
        except ValueError:
            raise SpecError(f"{SEARCH_BOUND_ENV} must be an integer, got {raw!r}")
        if bound < 1:
            raise SpecError(f"{SEARCH_BOUND_ENV} must be positive, got {bound}")
        logger.debug(f"search bound {bound} taken from {SEARCH_BOUND_ENV}")
        return replace(base, search_bound=bound)

    def updated(self, values: Dict[str, Any]) -> "Settings":
        known = {f.name: f.type for f in fields(self)}
        unknown = set(values) - set(known)
        if unknown:
            raise SpecError(f"unknown settings: {', '.join(sorted(unknown))}")
        for name, value in values.items():
            kinds = (int,) if known[name] is int else (int, float)
            if isinstance(value, bool) or not isinstance(value, kinds):
                raise SpecError(f"setting {name} must be {known[name].__name__}, got {value!r}")
            if value <= 0:
                raise SpecError(f"setting {name} must be positive, got {value}")
        return replace(self, **values)


def load_config(path: str) -> Dict[str, Any]:
    """
    Read a TOML config file.

    Returns the raw table; ``[settings]`` feeds Settings, the other tables are
    per-command option defaults.
    """
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise SpecError(f"cannot read config {path}: {e}")
    except tomllib.TOMLDecodeError as e:
        raise SpecError(f"invalid TOML in {path}: {e}")


def resolve_settings(config: Optional[Dict[str, Any]] = None, search_bound: Optional[int] = None) -> Settings:
    """Defaults < environment < config file < explicit option."""
    settings = Settings.from_env()
    if config and "settings" in config:
        settings = settings.updated(config["settings"])
    if search_bound is not None:
        settings = replace(settings, search_bound=search_bound)
    return settings


def report(body: Dict[str, Any]) -> Dict[str, Any]:
    """Stamp a report with the schema tag and package version."""
    stamped = {"schema": SCHEMA, "cantorfg_version": cantorfg_version.short_version}
    stamped.update(body)
    return stamped


def dump_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


def render_text(data: Dict[str, Any]) -> str:
    lines = []
    for key in sorted(data):
        value = data[key]
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True, ensure_ascii=False)
        lines.append(f"{key}: {value}")
    return "\n".join(lines)
