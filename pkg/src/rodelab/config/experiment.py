"""Experiment files: YAML documents resolved into typed run configuration.

An experiment file has up to five top-level sections::

    env:       {name: skirmish_hard, ...environment overrides}
    train:     {...TrainConfig fields}
    ablation:  {full_action_spaces: false, ...}
    logging:   {out_dir: runs, eval_interval: 10000, ...}
    seeds:     [0, 1, 2]

Every section is optional except ``env.name``. Unknown keys are rejected.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Any

import yaml

from rodelab.config.defaults import (
    DEFAULT_ENCODING,
    DEFAULT_EVAL_EPISODES,
    DEFAULT_EVAL_INTERVAL,
    DEFAULT_LOG_INTERVAL,
    DEFAULT_OUTPUT_DIR,
    SEED_ENV_VAR,
)
from rodelab.config.records import ConfigError, build
from rodelab.core.envs.base import MultiAgentEnv
from rodelab.core.envs.registry import EnvConfig, env_config_from_dict, make_env
from rodelab.core.trainer.config import LOGGING_KEYS, AblationConfig, TrainConfig

logger = logging.getLogger(__name__)

SECTIONS = ("env", "train", "ablation", "logging", "seeds")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class LoggingConfig:
    """Output location and reporting cadence.

    Attributes:
        out_dir: Directory receiving metrics, checkpoints and the config echo.
        eval_interval: Environment steps between evaluations.
        eval_episodes: Greedy episodes per evaluation.
        log_interval: Environment steps between ``train`` records.
        log_level: Root logging level.

    """

    out_dir: str = str(DEFAULT_OUTPUT_DIR)
    eval_interval: int = DEFAULT_EVAL_INTERVAL
    eval_episodes: int = DEFAULT_EVAL_EPISODES
    log_interval: int = DEFAULT_LOG_INTERVAL
    log_level: str = "INFO"

    def __post_init__(self) -> None:
        """Validate cadence and level."""
        for name in LOGGING_KEYS:
            if getattr(self, name) < 1:
                msg = f"{name} must be positive, got {getattr(self, name)}"
                raise ValueError(msg)
        if self.log_level.upper() not in LOG_LEVELS:
            msg = f"log_level must be one of {', '.join(LOG_LEVELS)}"
            raise ValueError(msg)


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment file."""

    env_name: str
    env: EnvConfig
    train: TrainConfig = field(default_factory=TrainConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    seeds: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        """Seeds must be a non-empty list of non-negative integers."""
        if not self.seeds:
            msg = "seeds must not be empty"
            raise ValueError(msg)
        if any(
            not isinstance(s, int) or isinstance(s, bool) or s < 0 for s in self.seeds
        ):
            msg = f"seeds must be non-negative integers, got {list(self.seeds)}"
            raise ValueError(msg)

    @property
    def out_dir(self) -> Path:
        """Run output directory."""
        return Path(self.logging.out_dir)

    def train_config(self, seed: int) -> TrainConfig:
        """Training config for one seed, logging cadence folded in."""
        return replace(
            self.train,
            seed=seed,
            eval_interval=self.logging.eval_interval,
            eval_episodes=self.logging.eval_episodes,
            log_interval=self.logging.log_interval,
        )

    def env_factory(self) -> partial[MultiAgentEnv]:
        """Callable building a fresh environment from a seed."""
        return partial(make_env, self.env_name, self.env)

    def with_seeds(self, seeds: tuple[int, ...]) -> ExperimentConfig:
        """Copy with a different seed list."""
        return replace(self, seeds=tuple(seeds))

    # ------------------ Conversion ------------------
    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        """Resolve a parsed document.

        Raises:
            ConfigError: On unknown sections or keys and on invalid values.

        """
        if not isinstance(data, Mapping):
            msg = "Experiment file must be a mapping of sections"
            raise ConfigError(msg)
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            msg = f"Unknown section(s): {', '.join(unknown)}"
            raise ConfigError(msg)

        env_section = dict(data.get("env") or {})
        if "name" not in env_section:
            msg = "env.name is required"
            raise ConfigError(msg)
        env_name = str(env_section.pop("name"))
        env = env_config_from_dict(env_name, env_section)

        train_section = dict(data.get("train") or {})
        bad = sorted(set(train_section) - TrainConfig.section_keys())
        if bad:
            msg = f"Unknown key(s) in 'train': {', '.join(bad)}"
            raise ConfigError(msg)
        logging_cfg = build(LoggingConfig, dict(data.get("logging") or {}), "logging")
        ablation = AblationConfig.from_dict(dict(data.get("ablation") or {}))
        train = build(
            TrainConfig,
            {
                **train_section,
                "ablation": ablation,
                "eval_interval": logging_cfg.eval_interval,
                "eval_episodes": logging_cfg.eval_episodes,
                "log_interval": logging_cfg.log_interval,
            },
            "train",
        )
        seeds = data.get("seeds", [0])
        if isinstance(seeds, int):
            seeds = [seeds]
        try:
            return cls(env_name, env, train, logging_cfg, tuple(seeds))
        except (TypeError, ValueError) as e:
            msg = f"Invalid 'seeds': {e}"
            raise ConfigError(msg) from e

    def to_dict(self) -> dict[str, Any]:
        """Plain-data document that ``from_dict`` reads back to an equal config."""
        return {
            "env": {"name": self.env_name, **self.env.to_dict()},
            "train": self.train.to_section(),
            "ablation": asdict(self.train.ablation),
            "logging": asdict(self.logging),
            "seeds": list(self.seeds),
        }


# ------------------ Files ------------------
def parse_experiment(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse YAML ``text``; ``source`` names it in error messages.

    Raises:
        ConfigError: With ``source:line:column`` for YAML syntax errors.

    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        if mark is not None:
            msg = f"{source}:{mark.line + 1}:{mark.column + 1}: {problem}"
        else:
            msg = f"{source}: {problem}"
        raise ConfigError(msg) from e
    try:
        return ExperimentConfig.from_dict(data if data is not None else {})
    except ConfigError as e:
        msg = f"{source}: {e}"
        raise ConfigError(msg) from e


def load_experiment(path: Path) -> ExperimentConfig:
    """Read and resolve an experiment file.

    Raises:
        ConfigError: If the file is missing or invalid; the message names it.

    """
    path = Path(path)
    if not path.is_file():
        msg = f"Config file not found: {path}"
        raise ConfigError(msg)
    return parse_experiment(path.read_text(encoding=DEFAULT_ENCODING), str(path))


def dump_experiment(config: ExperimentConfig) -> str:
    """YAML text of the resolved config."""
    return yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=False)


def write_experiment(config: ExperimentConfig, path: Path) -> Path:
    """Echo the resolved config to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_experiment(config), encoding=DEFAULT_ENCODING, newline="\n")
    return path


def resolve_seeds(
    config: ExperimentConfig, cli_seed: int | None = None
) -> ExperimentConfig:
    """Apply seed overrides: ``cli_seed``, else the environment variable.

    Raises:
        ConfigError: If the environment variable is not a non-negative integer.

    """
    if cli_seed is not None:
        return config.with_seeds((cli_seed,))
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return config
    try:
        seed = int(raw)
    except ValueError as e:
        msg = f"{SEED_ENV_VAR} must be an integer, got '{raw}'"
        raise ConfigError(msg) from e
    if seed < 0:
        msg = f"{SEED_ENV_VAR} must be non-negative, got {seed}"
        raise ConfigError(msg)
    logger.info("Seed overridden by %s=%d", SEED_ENV_VAR, seed)
    return config.with_seeds((seed,))
