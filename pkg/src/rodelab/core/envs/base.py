"""Decentralised partially observable environment interface."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)


class UnavailableActionError(ValueError):
    """An agent chose an action its availability mask forbids."""


# ------------------ Data Structures ------------------
@dataclass(frozen=True)
class EnvSpec:
    """Static description of an environment.

    Attributes:
        n_agents: Number of controlled agents.
        action_count: Discrete actions per agent.
        obs_dim: Length of each agent's observation.
        state_dim: Length of the global state.
        episode_limit: Maximum episode length T.
        gamma: Discount in ``[0, 1)``.
        obs_truncation: ``(N_a, N_e)`` nearest-neighbour limits, or None.

    """

    n_agents: int
    action_count: int
    obs_dim: int
    state_dim: int
    episode_limit: int
    gamma: float = 0.99
    obs_truncation: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        """Validate counts and discount."""
        sizes = ("n_agents", "action_count", "obs_dim", "state_dim", "episode_limit")
        for name in sizes:
            value = getattr(self, name)
            if value <= 0:
                msg = f"EnvSpec.{name} must be positive, got {value}"
                raise ValueError(msg)
        if not 0.0 <= self.gamma < 1.0:
            msg = f"EnvSpec.gamma must lie in [0, 1), got {self.gamma}"
            raise ValueError(msg)


@dataclass(frozen=True)
class Transition:
    """One environment step.

    Attributes:
        obs: ``(n, obs_dim)`` observations before the step.
        state: Global state before the step.
        actions: ``(n,)`` joint action.
        reward: Shared scalar reward.
        next_obs: Observations after the step.
        next_state: Global state after the step.
        terminated: True at win, loss or timeout.
        avail: ``(n, A)`` availability before the step.
        next_avail: Availability after the step.
        won: True when the episode ended in a win.

    """

    obs: NDArray[np.float64]
    state: NDArray[np.float64]
    actions: NDArray[np.int64]
    reward: float
    next_obs: NDArray[np.float64]
    next_state: NDArray[np.float64]
    terminated: bool
    avail: NDArray[np.bool_]
    next_avail: NDArray[np.bool_]
    won: bool = False


# ------------------ Environment ------------------
class MultiAgentEnv(ABC):
    """Shared-reward multi-agent environment with per-agent action masks.

    Subclasses implement ``_reset_dynamics``, ``_apply_actions``,
    ``observe``, ``available_actions`` and ``get_state``. Stepping validates
    availability, counts time and sets ``terminated`` on timeout.
    """

    def __init__(self, spec: EnvSpec, seed: int | None = None) -> None:
        self.spec = spec
        self._seed = seed
        self._rng = np.random.default_rng(seed)
        self._t = 0
        self._terminated = True

    # ------------------ Public API ------------------
    @property
    def t(self) -> int:
        """Steps taken in the current episode."""
        return self._t

    @property
    def terminated(self) -> bool:
        """Whether the current episode has ended."""
        return self._terminated

    @property
    def ground_truth_partition(self) -> NDArray[np.int64] | None:
        """Evaluation-only action labels; None when the environment has none."""
        return None

    def reset(
        self,
        seed: int | None = None,
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
        """Start a new episode.

        Args:
            seed: Reseed the environment's stream before resetting.

        Returns:
            ``(state, obs, avail)``.

        """
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        self._t = 0
        self._terminated = False
        self._reset_dynamics()
        return self.get_state(), self.get_obs(), self.get_avail()

    def step(self, actions: NDArray[np.int64] | list[int]) -> Transition:
        """Apply a joint action.

        Raises:
            RuntimeError: If the episode has already terminated.
            UnavailableActionError: If any action is masked out.

        """
        if self._terminated:
            msg = "step() called on a terminated episode; call reset() first"
            raise RuntimeError(msg)
        joint = np.asarray(actions, dtype=np.int64)
        if joint.shape != (self.spec.n_agents,):
            msg = f"Expected {self.spec.n_agents} actions, got shape {joint.shape}"
            raise ValueError(msg)
        obs, state, avail = self.get_obs(), self.get_state(), self.get_avail()
        for agent, action in enumerate(joint):
            if not 0 <= action < self.spec.action_count or not avail[agent, action]:
                allowed = np.flatnonzero(avail[agent]).tolist()
                msg = (
                    f"Agent {agent} chose unavailable action {action} at t={self._t}; "
                    f"available: {allowed}"
                )
                raise UnavailableActionError(msg)

        reward, game_over, won = self._apply_actions(joint)
        self._t += 1
        self._terminated = game_over or self._t >= self.spec.episode_limit
        return Transition(
            obs=obs,
            state=state,
            actions=joint.copy(),
            reward=float(reward),
            next_obs=self.get_obs(),
            next_state=self.get_state(),
            terminated=self._terminated,
            avail=avail,
            next_avail=self.get_avail(),
            won=won,
        )

    def get_obs(self) -> NDArray[np.float64]:
        """Observations of all agents, ``(n, obs_dim)``."""
        return np.stack([self.observe(i) for i in range(self.spec.n_agents)])

    def get_avail(self) -> NDArray[np.bool_]:
        """Availability masks of all agents, ``(n, A)``."""
        return np.stack([self.available_actions(i) for i in range(self.spec.n_agents)])

    def available_actions(self, agent: int) -> NDArray[np.bool_]:  # noqa: ARG002
        """All actions are available unless a subclass says otherwise."""
        return np.ones(self.spec.action_count, dtype=bool)

    # ------------------ Subclass hooks ------------------
    @abstractmethod
    def observe(self, agent: int) -> NDArray[np.float64]:
        """Observation vector of ``agent``."""

    @abstractmethod
    def get_state(self) -> NDArray[np.float64]:
        """Global state vector."""

    @abstractmethod
    def _reset_dynamics(self) -> None:
        """Initialise the episode's dynamic state."""

    @abstractmethod
    def _apply_actions(self, actions: NDArray[np.int64]) -> tuple[float, bool, bool]:
        """Advance dynamics; return ``(reward, game_over, won)``."""
