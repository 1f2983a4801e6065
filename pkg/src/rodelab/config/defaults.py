"""Default run settings for rodelab.

These are user-facing defaults that experiment files can override.
"""

from pathlib import Path

# === Training Defaults ===
DEFAULT_BUFFER_CAPACITY = 5000  # episodes
DEFAULT_TARGET_UPDATE_INTERVAL = 200  # learner updates
DEFAULT_GRAD_CLIP = 10.0
DEFAULT_RMSPROP_EPS = 1e-5
DEFAULT_TOTAL_STEPS = 200_000
DEFAULT_RANDOM_SPACE_RETRIES = 100

# === Evaluation Defaults ===
DEFAULT_EVAL_INTERVAL = 10_000  # environment steps
DEFAULT_EVAL_EPISODES = 32
DEFAULT_LOG_INTERVAL = 2_000  # environment steps between train records

# === File Defaults ===
PACKAGE_ROOT = Path(__file__).parent.parent
DEFAULT_OUTPUT_DIR = Path("runs")
METRICS_FILE_NAME = "metrics.jsonl"
CONFIG_ECHO_FILE_NAME = "config.yaml"
CHECKPOINT_FILE_NAME = "checkpoint.h5"
CHECKPOINT_DIR_NAME = "checkpoints"
DEFAULT_ENCODING = "utf-8"

# === Format Versions ===
METRICS_SCHEMA_VERSION = 1
CHECKPOINT_FORMAT_VERSION = 1

# === Environment Variables ===
SEED_ENV_VAR = "RODE_LAB_SEED"
