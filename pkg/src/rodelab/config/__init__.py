"""Centralized configuration for rodelab.

Import from this module to access algorithm constants and run defaults.
Experiment files are handled by ``rodelab.config.experiment``.

Example:
    from rodelab.config import ACTION_REPR_DIM, DEFAULT_OUTPUT_DIR

"""

from rodelab.config.constants import (
    ACTION_REPR_DIM,
    CLUSTERS_HETEROGENEOUS,
    CLUSTERS_HOMOGENEOUS,
    CLUSTERS_SINGLE_ENEMY,
    EPSILON_ANNEAL_STEPS_HARD,
    ROLE_INTERVAL,
    ROLE_INTERVAL_SWEEP,
)
from rodelab.config.defaults import (
    CHECKPOINT_FILE_NAME,
    CONFIG_ECHO_FILE_NAME,
    DEFAULT_OUTPUT_DIR,
    METRICS_FILE_NAME,
    SEED_ENV_VAR,
)
from rodelab.config.records import ConfigError

__all__ = [
    # Constants
    "ACTION_REPR_DIM",
    # Defaults
    "CHECKPOINT_FILE_NAME",
    "CLUSTERS_HETEROGENEOUS",
    "CLUSTERS_HOMOGENEOUS",
    "CLUSTERS_SINGLE_ENEMY",
    "CONFIG_ECHO_FILE_NAME",
    "ConfigError",
    "DEFAULT_OUTPUT_DIR",
    "EPSILON_ANNEAL_STEPS_HARD",
    "METRICS_FILE_NAME",
    "ROLE_INTERVAL",
    "ROLE_INTERVAL_SWEEP",
    "SEED_ENV_VAR",
]
