"""Training configuration records."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Literal

from rodelab.config.constants import (
    ACTION_REPR_DIM,
    BATCH_SIZE_EPISODES,
    CLUSTERS_HOMOGENEOUS,
    EFFECT_LOSS_REWARD_WEIGHT,
    EPSILON_ANNEAL_STEPS,
    EPSILON_FINISH,
    EPSILON_START,
    GAMMA,
    LEARNING_RATE,
    REPR_PHASE_STEPS,
    RMSPROP_ALPHA,
    ROLE_INTERVAL,
)
from rodelab.config.defaults import (
    DEFAULT_BUFFER_CAPACITY,
    DEFAULT_EVAL_EPISODES,
    DEFAULT_EVAL_INTERVAL,
    DEFAULT_GRAD_CLIP,
    DEFAULT_LOG_INTERVAL,
    DEFAULT_RMSPROP_EPS,
    DEFAULT_TARGET_UPDATE_INTERVAL,
    DEFAULT_TOTAL_STEPS,
)
from rodelab.config.records import ConfigError, build

AblationVariant = Literal["A", "B", "C", "D"]


@dataclass(frozen=True)
class AblationConfig:
    """Substitutions for ablation runs.

    Attributes:
        full_action_spaces: Every role uses the whole action space (A).
        random_action_spaces: Roles get random covering subsets (B).
        no_action_repr: Conventional per-role and per-action output layers (C).

    Variant D combines ``full_action_spaces`` and ``no_action_repr``. Together
    they make the agent flat: one role holding every action, one shared
    conventional head, no representation phase and no selector training.

    """

    full_action_spaces: bool = False
    random_action_spaces: bool = False
    no_action_repr: bool = False

    def __post_init__(self) -> None:
        """Only the four documented variants (and the full method) are valid."""
        if self.full_action_spaces and self.random_action_spaces:
            msg = "full_action_spaces and random_action_spaces are mutually exclusive"
            raise ValueError(msg)
        if self.random_action_spaces and self.no_action_repr:
            msg = "random_action_spaces cannot be combined with no_action_repr"
            raise ValueError(msg)

    @property
    def variant(self) -> str:
        """``RODE`` or the ablation letter."""
        if self.full_action_spaces and self.no_action_repr:
            return "D"
        if self.full_action_spaces:
            return "A"
        if self.random_action_spaces:
            return "B"
        if self.no_action_repr:
            return "C"
        return "RODE"

    @property
    def flat(self) -> bool:
        """Full action spaces with conventional heads (variant D)."""
        return self.full_action_spaces and self.no_action_repr

    @property
    def skips_representation_phase(self) -> bool:
        """Variant D learns no action representations at all."""
        return self.flat

    @classmethod
    def from_variant(cls, variant: str) -> AblationConfig:
        """Flags for an ablation letter (or ``RODE`` for none)."""
        table = {
            "RODE": cls(),
            "A": cls(full_action_spaces=True),
            "B": cls(random_action_spaces=True),
            "C": cls(no_action_repr=True),
            "D": cls(full_action_spaces=True, no_action_repr=True),
        }
        try:
            return table[variant.upper()]
        except KeyError as e:
            msg = f"Unknown ablation variant '{variant}'; choose A, B, C or D"
            raise ConfigError(msg) from e

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> AblationConfig:
        """Build from a parsed mapping."""
        return build(cls, data, "ablation")


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs besides the environment.

    Step counts are environment timesteps. ``repr_steps`` is the length of
    the representation phase; the exploration schedule restarts when the
    hierarchy phase begins.
    """

    total_steps: int = DEFAULT_TOTAL_STEPS
    repr_steps: int = REPR_PHASE_STEPS
    role_interval: int = ROLE_INTERVAL
    n_clusters: int = CLUSTERS_HOMOGENEOUS
    repr_dim: int = ACTION_REPR_DIM
    epsilon_start: float = EPSILON_START
    epsilon_finish: float = EPSILON_FINISH
    epsilon_anneal_steps: int = EPSILON_ANNEAL_STEPS
    batch_size: int = BATCH_SIZE_EPISODES
    buffer_capacity: int = DEFAULT_BUFFER_CAPACITY
    target_update_interval: int = DEFAULT_TARGET_UPDATE_INTERVAL
    lr: float = LEARNING_RATE
    rmsprop_alpha: float = RMSPROP_ALPHA
    rmsprop_eps: float = DEFAULT_RMSPROP_EPS
    lambda_e: float = EFFECT_LOSS_REWARD_WEIGHT
    gamma: float = GAMMA
    grad_clip: float | None = DEFAULT_GRAD_CLIP
    selector: Literal["recurrent", "feedforward"] = "recurrent"
    discounted_selector_targets: bool = False
    unconstrained_bootstrap: bool = False
    transferable_inputs: bool = False
    eval_interval: int = DEFAULT_EVAL_INTERVAL
    eval_episodes: int = DEFAULT_EVAL_EPISODES
    log_interval: int = DEFAULT_LOG_INTERVAL
    seed: int = 0
    ablation: AblationConfig = field(default_factory=AblationConfig)

    def __post_init__(self) -> None:
        """Validate ranges and cross-field constraints."""
        positive = (
            "total_steps",
            "role_interval",
            "n_clusters",
            "repr_dim",
            "epsilon_anneal_steps",
            "batch_size",
            "buffer_capacity",
            "target_update_interval",
            "eval_interval",
            "eval_episodes",
            "log_interval",
        )
        for name in positive:
            if getattr(self, name) < 1:
                msg = f"{name} must be positive, got {getattr(self, name)}"
                raise ValueError(msg)
        if self.lr <= 0 or self.lambda_e < 0:
            msg = "lr must be positive and lambda_e non-negative"
            raise ValueError(msg)
        if self.repr_steps < 0 or self.repr_steps >= self.total_steps:
            msg = (
                f"repr_steps ({self.repr_steps}) must lie in "
                f"[0, total_steps={self.total_steps})"
            )
            raise ValueError(msg)
        if not 0.0 <= self.epsilon_finish <= self.epsilon_start <= 1.0:
            msg = "Need 0 <= epsilon_finish <= epsilon_start <= 1"
            raise ValueError(msg)
        if not 0.0 <= self.gamma < 1.0:
            msg = f"gamma must lie in [0, 1), got {self.gamma}"
            raise ValueError(msg)
        if self.grad_clip is not None and self.grad_clip <= 0:
            msg = "grad_clip must be positive or null"
            raise ValueError(msg)
        if self.selector not in ("recurrent", "feedforward"):
            msg = (
                "selector must be 'recurrent' or 'feedforward', "
                f"got '{self.selector}'"
            )
            raise ValueError(msg)
        if self.transferable_inputs and self.ablation.skips_representation_phase:
            msg = "transferable_inputs needs action representations; variant D has none"
            raise ValueError(msg)

    @property
    def effective_repr_steps(self) -> int:
        """Representation-phase length after ablation substitutions."""
        return 0 if self.ablation.skips_representation_phase else self.repr_steps

    def with_ablation(self, variant: str) -> TrainConfig:
        """Copy with the flags of ablation ``variant``."""
        return replace(self, ablation=AblationConfig.from_variant(variant))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TrainConfig:
        """Build from a flat mapping; ``ablation`` may be a nested mapping."""
        data = dict(data)
        if isinstance(data.get("ablation"), Mapping):
            data["ablation"] = AblationConfig.from_dict(data["ablation"])
        return build(cls, data, "train")

    def to_dict(self) -> dict[str, Any]:
        """Every field as plain data, ablation nested."""
        return asdict(self)

    @classmethod
    def section_keys(cls) -> set[str]:
        """Keys accepted in the ``train`` section of an experiment file."""
        return {f.name for f in fields(cls)} - {"ablation", "seed", *LOGGING_KEYS}

    def to_section(self) -> dict[str, Any]:
        """The ``train`` section of an experiment file."""
        data = asdict(self)
        return {k: v for k, v in data.items() if k in self.section_keys()}


LOGGING_KEYS = ("eval_interval", "eval_episodes", "log_interval")
