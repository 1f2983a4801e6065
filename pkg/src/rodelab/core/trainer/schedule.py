"""Exploration schedule, seed streams and run counters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import EPSILON_ANNEAL_STEPS, EPSILON_FINISH, EPSILON_START

SEED_STREAMS = (
    "env",
    "eval_env",
    "repr_init",
    "agent_init",
    "explore",
    "replay",
    "cluster",
    "eval_explore",
)


@dataclass(frozen=True)
class EpsilonSchedule:
    """Linear annealing from ``start`` to ``finish`` over ``anneal_steps``."""

    start: float = EPSILON_START
    finish: float = EPSILON_FINISH
    anneal_steps: int = EPSILON_ANNEAL_STEPS

    def value(self, step: int) -> float:
        """Epsilon after ``step`` steps of annealing."""
        frac = min(max(step, 0) / self.anneal_steps, 1.0)
        return self.start + (self.finish - self.start) * frac


class SeedStreams:
    """Independent generators split from one integer seed.

    ``np.random.SeedSequence(seed).spawn`` yields one child per named
    component in ``SEED_STREAMS`` order, so adding a consumer to one
    component never shifts another's draws.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        children = np.random.SeedSequence(seed).spawn(len(SEED_STREAMS))
        self._children = dict(zip(SEED_STREAMS, children, strict=True))
        self._generators = {
            name: np.random.default_rng(child) for name, child in self._children.items()
        }

    def rng(self, name: str) -> np.random.Generator:
        """Generator for component ``name``."""
        return self._generators[name]

    def int_seed(self, name: str) -> int:
        """Stable 32-bit integer seed for component ``name``."""
        return int(self._children[name].generate_state(1)[0])


@dataclass
class RunState:
    """Counters and accumulators of one training run.

    Attributes:
        env_steps: Environment steps taken.
        episodes: Episodes completed.
        phase: ``representation`` or ``hierarchy``.
        epsilon: Current exploration rate.
        hierarchy_start: Step at which the hierarchy phase began.
        updates: Learner update pairs in the hierarchy phase.
        window_returns: Training returns since the last train record.
        window_wins: Win flags since the last train record.
        role_counts: Role selections since the last train record.
        fallbacks: Role fallback events since the last train record.

    """

    env_steps: int = 0
    episodes: int = 0
    phase: str = "representation"
    epsilon: float = 1.0
    hierarchy_start: int | None = None
    updates: int = 0
    window_returns: list[float] = field(default_factory=list)
    window_wins: list[bool] = field(default_factory=list)
    role_counts: NDArray[np.int64] = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64)
    )
    fallbacks: int = 0

    def reset_window(self, n_roles: int) -> None:
        """Clear the per-record accumulators."""
        self.window_returns = []
        self.window_wins = []
        self.role_counts = np.zeros(n_roles, dtype=np.int64)
        self.fallbacks = 0

    def role_frequencies(self) -> list[float]:
        """Fraction of selections per role in the window."""
        total = int(self.role_counts.sum())
        if total == 0:
            return [0.0] * len(self.role_counts)
        return (self.role_counts / total).tolist()
