"""Line-oriented ``key = value`` files used for tables and run configs."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError, FileUnreadable


def read_kv(path) -> dict[str, str]:
    """Parse a file of ``key = value`` lines.

    Blank lines and ``#`` comments are ignored. Duplicate keys and lines
    without ``=`` are configuration errors.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: {value!r} is not a number") from None
