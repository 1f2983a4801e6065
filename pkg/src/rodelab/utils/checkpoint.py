"""HDF5 checkpoints of a trained role-based agent.

Layout: one flat dataset per parameter at the file root, named
``selector.<param>`` or ``policies.<param>``, plus ``table`` (absent when no
representations were learned) and ``role_masks`` (uint8). Run metadata lives
in root attributes. Arrays are little-endian float64 and dataset modification
times are not tracked. Files use the earliest HDF5 format, whose root group
header holds no timestamp, so saving a reloaded agent reproduces the file byte
for byte.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import h5py
import numpy as np
import yaml

from rodelab.config.defaults import CHECKPOINT_FORMAT_VERSION
from rodelab.core.action_repr.model import ActionRepresentationTable
from rodelab.core.envs.base import EnvSpec
from rodelab.core.roles.model import RoleSet
from rodelab.core.trainer.agent import RodeAgent
from rodelab.core.trainer.config import TrainConfig

logger = logging.getLogger(__name__)

FLOAT_DTYPE = "<f8"
SPEC_PREFIX = "spec."


class CheckpointError(ValueError):
    """A checkpoint file is missing, unreadable or of an unsupported format."""


@dataclass
class Checkpoint:
    """A restored agent and the environment it was trained on.

    Attributes:
        agent: Agent with restored weights, table and roles.
        env_name: Registry name of the training environment.
        env_config: Environment overrides as plain data.

    """

    agent: RodeAgent
    env_name: str
    env_config: dict[str, Any]


def _dump(data: Any) -> str:  # noqa: ANN401
    return yaml.safe_dump(data, sort_keys=True, default_flow_style=False)


def _write_array(f: h5py.File, name: str, array: np.ndarray, dtype: str) -> None:
    f.create_dataset(name, data=np.asarray(array, dtype=dtype), track_times=False)


def save_checkpoint(
    path: Path,
    agent: RodeAgent,
    env_name: str,
    env_config: dict[str, Any] | None = None,
) -> Path:
    """Write ``agent`` to ``path``, replacing any existing file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with h5py.File(path, "w", libver="earliest") as f:
        f.attrs["format_version"] = CHECKPOINT_FORMAT_VERSION
        f.attrs["env_name"] = env_name
        f.attrs["env_config"] = _dump(env_config or {})
        f.attrs["train_config"] = _dump(agent.config.to_dict())
        for spec_field in fields(EnvSpec):
            value = getattr(agent.spec, spec_field.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = np.asarray(value, dtype=np.int64)
            f.attrs[SPEC_PREFIX + spec_field.name] = value

        if agent.table is not None:
            _write_array(f, "table", agent.table.vectors, FLOAT_DTYPE)
        _write_array(f, "role_masks", agent.roleset.masks, "u1")
        modules = (("selector", agent.selector), ("policies", agent.policies))
        for prefix, module in modules:
            for name, array in sorted(module.state_dict().items()):
                _write_array(f, f"{prefix}.{name}", array, FLOAT_DTYPE)
    logger.info("Saved checkpoint %s", path)
    return path


def _read_spec(attrs: h5py.AttributeManager) -> EnvSpec:
    kwargs: dict[str, Any] = {}
    for spec_field in fields(EnvSpec):
        key = SPEC_PREFIX + spec_field.name
        if key not in attrs:
            continue
        value = attrs[key]
        if isinstance(value, np.ndarray):
            value = tuple(int(v) for v in value)
        elif isinstance(value, np.integer):
            value = int(value)
        elif isinstance(value, np.floating):
            value = float(value)
        kwargs[spec_field.name] = value
    return EnvSpec(**kwargs)


def load_checkpoint(path: Path) -> Checkpoint:
    """Rebuild the agent stored at ``path``.

    Raises:
        CheckpointError: If the file is missing, not a checkpoint, of another
            format version, or its arrays do not fit the stored config.

    """
    path = Path(path)
    if not path.is_file():
        msg = f"Checkpoint not found: {path}"
        raise CheckpointError(msg)
    try:
        with h5py.File(path, "r") as f:
            version = int(f.attrs.get("format_version", -1))
            if version != CHECKPOINT_FORMAT_VERSION:
                msg = f"{path}: unsupported checkpoint format version {version}"
                raise CheckpointError(msg)
            env_name = str(f.attrs["env_name"])
            env_config = yaml.safe_load(str(f.attrs["env_config"])) or {}
            config = TrainConfig.from_dict(yaml.safe_load(str(f.attrs["train_config"])))
            spec = _read_spec(f.attrs)
            table = ActionRepresentationTable(f["table"][()]) if "table" in f else None
            roleset = RoleSet(f["role_masks"][()].astype(bool))
            states: dict[str, dict[str, np.ndarray]] = {"selector": {}, "policies": {}}
            for key in f:
                prefix, _, name = key.partition(".")
                if prefix in states:
                    states[prefix][name] = f[key][()]
    except OSError as e:
        msg = f"{path}: not a readable checkpoint ({e})"
        raise CheckpointError(msg) from e
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, CheckpointError):
            raise
        msg = f"{path}: malformed checkpoint ({e})"
        raise CheckpointError(msg) from e

    agent = RodeAgent.build(spec, config, table, roleset, np.random.default_rng(0))
    try:
        agent.selector.load_state_dict(states["selector"])
        agent.policies.load_state_dict(states["policies"])
    except (KeyError, ValueError) as e:
        msg = f"{path}: parameters do not match the stored configuration ({e})"
        raise CheckpointError(msg) from e
    logger.info("Loaded checkpoint %s (%s)", path, env_name)
    return Checkpoint(agent, env_name, env_config)
