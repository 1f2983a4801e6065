"""Built-in multi-agent environments."""

from rodelab.core.envs.base import (
    EnvSpec,
    MultiAgentEnv,
    Transition,
    UnavailableActionError,
)
from rodelab.core.envs.effect import EffectGame
from rodelab.core.envs.matrix import MatrixGame
from rodelab.core.envs.registry import ENVS, env_config_from_dict, make_env
from rodelab.core.envs.skirmish import Skirmish

__all__ = [
    "ENVS",
    "EffectGame",
    "EnvSpec",
    "MatrixGame",
    "MultiAgentEnv",
    "Skirmish",
    "Transition",
    "UnavailableActionError",
    "env_config_from_dict",
    "make_env",
]
