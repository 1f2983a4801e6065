"""Helpers for building typed config records from parsed mappings."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import fields
from typing import Any


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""


def check_keys(cls: type, data: Mapping[str, Any], section: str) -> None:
    """Reject keys that ``cls`` does not declare.

    Raises:
        ConfigError: Naming the section and the unknown keys.

    """
    if not isinstance(data, Mapping):
        msg = f"Section '{section}' must be a mapping, got {type(data).__name__}"
        raise ConfigError(msg)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        msg = f"Unknown key(s) in '{section}': {', '.join(unknown)}"
        raise ConfigError(msg)


def build(cls: type, data: Mapping[str, Any], section: str) -> Any:  # noqa: ANN401
    """Construct ``cls(**data)`` and rewrap validation errors.

    Raises:
        ConfigError: On unknown keys or any value rejected by ``cls``.

    """
    check_keys(cls, data, section)
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        msg = f"Invalid '{section}': {e}"
        raise ConfigError(msg) from e
