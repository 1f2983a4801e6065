"""Episodic replay buffer shared by every learner."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, fields

import numpy as np
from numpy.typing import NDArray

from rodelab.config.defaults import DEFAULT_BUFFER_CAPACITY
from rodelab.core.envs.base import Transition

logger = logging.getLogger(__name__)


class BufferNotReadyError(RuntimeError):
    """Fewer episodes are stored than a batch needs."""


class EpisodeTooLongError(ValueError):
    """An episode exceeds the buffer's episode limit."""


# ------------------ Data Structures ------------------
@dataclass
class Episode:
    """One complete episode.

    Attributes:
        obs: ``(L+1, n, obs_dim)`` observations, including the final one.
        state: ``(L+1, state_dim)`` global states.
        avail: ``(L+1, n, A)`` availability masks.
        actions: ``(L, n)`` joint actions.
        roles: ``(L, n)`` role active at each primitive step.
        rewards: ``(L,)`` shared rewards.
        terminated: ``(L,)`` termination flags.
        won: Whether the episode ended in a win.

    """

    obs: NDArray[np.float64]
    state: NDArray[np.float64]
    avail: NDArray[np.bool_]
    actions: NDArray[np.int64]
    roles: NDArray[np.int64]
    rewards: NDArray[np.float64]
    terminated: NDArray[np.bool_]
    won: bool = False

    def __post_init__(self) -> None:
        """Check that per-step arrays agree on the episode length."""
        length = len(self.actions)
        if length == 0:
            msg = "Episodes need at least one step"
            raise ValueError(msg)
        if any(len(a) != length + 1 for a in (self.obs, self.state, self.avail)):
            msg = "obs, state and avail must hold one more entry than actions"
            raise ValueError(msg)
        if any(len(a) != length for a in (self.roles, self.rewards, self.terminated)):
            msg = "roles, rewards and terminated must match the number of actions"
            raise ValueError(msg)

    @property
    def length(self) -> int:
        """Number of primitive steps."""
        return len(self.actions)

    @property
    def episode_return(self) -> float:
        """Undiscounted sum of rewards."""
        return float(self.rewards.sum())

    def copy(self) -> Episode:
        """Deep copy of every array."""
        arrays = {
            f.name: np.array(getattr(self, f.name), copy=True)
            for f in fields(self)
            if f.name != "won"
        }
        return Episode(**arrays, won=self.won)


@dataclass
class EpisodeBuilder:
    """Accumulates transitions until the episode terminates."""

    obs: list[NDArray[np.float64]] = field(default_factory=list)
    state: list[NDArray[np.float64]] = field(default_factory=list)
    avail: list[NDArray[np.bool_]] = field(default_factory=list)
    actions: list[NDArray[np.int64]] = field(default_factory=list)
    roles: list[NDArray[np.int64]] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    terminated: list[bool] = field(default_factory=list)
    won: bool = False

    def add(self, transition: Transition, roles: NDArray[np.int64]) -> None:
        """Record one step and the roles that were active during it."""
        if not self.obs:
            self.obs.append(transition.obs)
            self.state.append(transition.state)
            self.avail.append(transition.avail)
        self.obs.append(transition.next_obs)
        self.state.append(transition.next_state)
        self.avail.append(transition.next_avail)
        self.actions.append(np.asarray(transition.actions, dtype=np.int64))
        self.roles.append(np.asarray(roles, dtype=np.int64))
        self.rewards.append(transition.reward)
        self.terminated.append(transition.terminated)
        self.won = self.won or transition.won

    def finish(self) -> Episode:
        """Freeze into an ``Episode``."""
        return Episode(
            obs=np.stack(self.obs).astype(np.float64),
            state=np.stack(self.state).astype(np.float64),
            avail=np.stack(self.avail).astype(bool),
            actions=np.stack(self.actions),
            roles=np.stack(self.roles),
            rewards=np.asarray(self.rewards, dtype=np.float64),
            terminated=np.asarray(self.terminated, dtype=bool),
            won=self.won,
        )


@dataclass
class EpisodeBatch:
    """Episodes padded to a common length ``T`` along axis 1.

    Every array has ``T + 1`` time entries. Per-step quantities (actions,
    roles, rewards, terminated) are meaningful where ``filled`` is 1; the
    extra entry is padding. Observation-like arrays are real up to each
    episode's ``L + 1``.
    """

    obs: NDArray[np.float64]
    state: NDArray[np.float64]
    avail: NDArray[np.bool_]
    actions: NDArray[np.int64]
    roles: NDArray[np.int64]
    rewards: NDArray[np.float64]
    terminated: NDArray[np.bool_]
    filled: NDArray[np.float64]
    lengths: NDArray[np.int64]

    @property
    def batch_size(self) -> int:
        """Number of episodes."""
        return len(self.lengths)

    @property
    def max_length(self) -> int:
        """Longest episode in the batch."""
        return int(self.filled.shape[1] - 1)

    @property
    def n_agents(self) -> int:
        """Agents per episode."""
        return int(self.actions.shape[2])

    @classmethod
    def from_episodes(cls, episodes: list[Episode]) -> EpisodeBatch:
        """Stack and pad ``episodes``; padding is zeros (availability True)."""
        if not episodes:
            msg = "Cannot batch zero episodes"
            raise ValueError(msg)
        first = episodes[0]
        b = len(episodes)
        t_max = max(ep.length for ep in episodes)
        n = first.actions.shape[1]
        obs = np.zeros((b, t_max + 1, *first.obs.shape[1:]))
        state = np.zeros((b, t_max + 1, *first.state.shape[1:]))
        avail = np.ones((b, t_max + 1, *first.avail.shape[1:]), dtype=bool)
        actions = np.zeros((b, t_max + 1, n), dtype=np.int64)
        roles = np.zeros((b, t_max + 1, n), dtype=np.int64)
        rewards = np.zeros((b, t_max + 1))
        terminated = np.zeros((b, t_max + 1), dtype=bool)
        filled = np.zeros((b, t_max + 1))
        lengths = np.zeros(b, dtype=np.int64)
        for i, ep in enumerate(episodes):
            length = ep.length
            obs[i, : length + 1] = ep.obs
            state[i, : length + 1] = ep.state
            avail[i, : length + 1] = ep.avail
            actions[i, :length] = ep.actions
            roles[i, :length] = ep.roles
            rewards[i, :length] = ep.rewards
            terminated[i, :length] = ep.terminated
            filled[i, :length] = 1.0
            lengths[i] = length
        return cls(
            obs, state, avail, actions, roles, rewards, terminated, filled, lengths
        )


# ------------------ Buffer ------------------
class EpisodeBuffer:
    """FIFO store of whole episodes with uniform sampling.

    Episodes are copied on the way in and on the way out, so stored data is
    never mutated by callers.
    """

    def __init__(
        self, episode_limit: int, capacity: int = DEFAULT_BUFFER_CAPACITY
    ) -> None:
        if capacity < 1 or episode_limit < 1:
            msg = (
                "capacity and episode_limit must be positive, "
                f"got {capacity}, {episode_limit}"
            )
            raise ValueError(msg)
        self.capacity = capacity
        self.episode_limit = episode_limit
        self._episodes: deque[Episode] = deque(maxlen=capacity)
        self.total_pushed = 0

    def __len__(self) -> int:
        return len(self._episodes)

    def push(self, episode: Episode) -> None:
        """Store ``episode``, evicting the oldest at capacity.

        Raises:
            EpisodeTooLongError: If the episode exceeds ``episode_limit``.

        """
        if episode.length > self.episode_limit:
            msg = (
                f"Episode of length {episode.length} exceeds limit {self.episode_limit}"
            )
            raise EpisodeTooLongError(msg)
        self._episodes.append(episode.copy())
        self.total_pushed += 1

    def get_episode(self, index: int) -> Episode:
        """Copy of the stored episode at ``index`` (0 is the oldest)."""
        return self._episodes[index].copy()

    def can_sample(self, batch_size: int) -> bool:
        """Whether ``batch_size`` episodes are stored."""
        return len(self._episodes) >= batch_size

    def sample_indices(
        self, batch_size: int, rng: np.random.Generator
    ) -> NDArray[np.int64]:
        """Uniform indices with replacement."""
        if not self.can_sample(batch_size):
            msg = f"Buffer holds {len(self)} episodes, batch needs {batch_size}"
            raise BufferNotReadyError(msg)
        return rng.integers(0, len(self._episodes), size=batch_size)

    def sample(self, batch_size: int, rng: np.random.Generator) -> EpisodeBatch:
        """Uniformly sample ``batch_size`` episodes with replacement.

        Raises:
            BufferNotReadyError: If fewer than ``batch_size`` episodes are stored.

        """
        idx = self.sample_indices(batch_size, rng)
        return EpisodeBatch.from_episodes([self._episodes[i] for i in idx])


def push_episode(buffer: EpisodeBuffer, episode: Episode) -> None:
    """Store ``episode`` in ``buffer``."""
    buffer.push(episode)


def sample_batch(
    buffer: EpisodeBuffer,
    batch_size: int,
    rng: np.random.Generator,
) -> EpisodeBatch:
    """Sample a padded batch from ``buffer``."""
    return buffer.sample(batch_size, rng)
