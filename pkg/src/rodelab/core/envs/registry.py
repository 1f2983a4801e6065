"""Environment lookup by name."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

from rodelab.config.records import ConfigError
from rodelab.core.envs.base import MultiAgentEnv
from rodelab.core.envs.config import (
    SKIRMISH_PRESETS,
    EffectGameConfig,
    MatrixGameConfig,
    SkirmishConfig,
)
from rodelab.core.envs.effect import EffectGame
from rodelab.core.envs.matrix import MatrixGame
from rodelab.core.envs.skirmish import Skirmish

EnvConfig = MatrixGameConfig | EffectGameConfig | SkirmishConfig


@dataclass(frozen=True)
class EnvEntry:
    """How to build and configure one environment family."""

    config_cls: type
    factory: Callable[[Any, int | None], MultiAgentEnv]
    base: EnvConfig | None = None


ENVS: dict[str, EnvEntry] = {
    "matrix": EnvEntry(MatrixGameConfig, MatrixGame),
    "effect": EnvEntry(EffectGameConfig, EffectGame),
    "skirmish": EnvEntry(SkirmishConfig, Skirmish),
    **{
        name: EnvEntry(SkirmishConfig, Skirmish, preset)
        for name, preset in SKIRMISH_PRESETS.items()
    },
}


def _entry(name: str) -> EnvEntry:
    try:
        return ENVS[name]
    except KeyError as e:
        msg = f"Unknown environment '{name}'; choose from {', '.join(sorted(ENVS))}"
        raise ConfigError(msg) from e


def env_config_from_dict(name: str, data: Mapping[str, Any] | None = None) -> EnvConfig:
    """Resolve ``name`` plus overrides into a typed config.

    Preset names start from the preset and apply ``data`` on top.
    """
    entry = _entry(name)
    data = dict(data or {})
    if entry.base is not None:
        merged = entry.base.to_dict()
        merged.update(data)
        data = merged
    return entry.config_cls.from_dict(data)


def make_env(
    name: str,
    config: EnvConfig | None = None,
    seed: int | None = None,
) -> MultiAgentEnv:
    """Build environment ``name``.

    ``config`` defaults to the preset, or to the family default.
    """
    entry = _entry(name)
    if config is None:
        config = entry.base if entry.base is not None else entry.config_cls()
    if not isinstance(config, entry.config_cls):
        msg = (
            f"Environment '{name}' expects {entry.config_cls.__name__}, "
            f"got {type(config).__name__}"
        )
        raise ConfigError(msg)
    return entry.factory(config, seed)


