"""Flat ``key = value`` configuration files."""

from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from .errors import ConfigError
from .models import RunConfig


def parse_value(raw: str) -> Any:
    """Interpret a value as bool, int, float or string, in that order."""
    value = raw.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    lowered = value.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"{source}:{lineno}: expected 'key = value', got {line!r}"
            )
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = parse_value(raw)
    return values


def load_config(path: Union[str, Path], **overrides: Any) -> RunConfig:
    """Read and validate a run configuration; overrides win over the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    values = parse_config_text(text, str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(values, str(path))


def build_config(values: Dict[str, Any], source: str = "<config>") -> RunConfig:
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"{source}: {e}") from e


def render_config(config: RunConfig) -> str:
    """Inverse of parse_config_text for a validated config."""
    lines = []
    for key, value in config.model_dump().items():
        if value is None:
            continue
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
