"""Tests for the episodic replay buffer.

This test module covers:
- Episode validation and copying
- Building episodes from environment transitions
- FIFO storage, copy-on-read and the length limit
- Uniform sampling with replacement and padded batches
"""

from __future__ import annotations

import numpy as np
import pytest

from rodelab.core.envs.effect import EffectGame
from rodelab.core.replay import (
    BufferNotReadyError,
    Episode,
    EpisodeBatch,
    EpisodeBuffer,
    EpisodeBuilder,
    EpisodeTooLongError,
    push_episode,
    sample_batch,
)

N_AGENTS = 2
OBS_DIM = 3
STATE_DIM = 4
ACTIONS = 5
SAMPLE_DRAWS = 10_000


def _episode(length: int, marker: float = 0.0) -> Episode:
    """Episode whose rewards all equal ``marker``."""
    rewards = np.full(length, marker)
    terminated = np.zeros(length, dtype=bool)
    terminated[-1] = True
    return Episode(
        obs=np.full((length + 1, N_AGENTS, OBS_DIM), marker),
        state=np.full((length + 1, STATE_DIM), marker),
        avail=np.ones((length + 1, N_AGENTS, ACTIONS), dtype=bool),
        actions=np.ones((length, N_AGENTS), dtype=np.int64),
        roles=np.zeros((length, N_AGENTS), dtype=np.int64),
        rewards=rewards,
        terminated=terminated,
    )


# ====================================================================================
# EPISODE TESTS
# ====================================================================================
class TestEpisode:
    """Tests for single episodes."""

    def test_length_and_return(self) -> None:
        """Length counts actions and the return sums rewards."""
        episode = _episode(4, marker=0.5)

        assert episode.length == 4
        assert episode.episode_return == pytest.approx(2.0)

    def test_rejects_empty(self) -> None:
        """Episodes need at least one step."""
        with pytest.raises(ValueError, match="at least one step"):
            _episode(0)

    def test_rejects_mismatched_obs(self) -> None:
        """Observations need one more entry than actions."""
        good = _episode(3)

        with pytest.raises(ValueError, match="one more entry"):
            Episode(
                obs=good.obs[:-1],
                state=good.state,
                avail=good.avail,
                actions=good.actions,
                roles=good.roles,
                rewards=good.rewards,
                terminated=good.terminated,
            )

    def test_copy_is_deep(self) -> None:
        """Mutating a copy leaves the original untouched."""
        episode = _episode(2, marker=1.0)
        twin = episode.copy()

        twin.rewards[0] = 99.0

        assert episode.rewards[0] == 1.0

    def test_builder_from_environment(self, effect_env: EffectGame) -> None:
        """The builder records L steps and L + 1 observations."""
        _, _, _ = effect_env.reset()
        builder = EpisodeBuilder()
        roles = np.array([1, 0])
        while not effect_env.terminated:
            builder.add(effect_env.step([0, 3]), roles)

        episode = builder.finish()

        limit = effect_env.spec.episode_limit
        assert episode.length == limit
        assert episode.obs.shape == (limit + 1, 2, 3)
        assert episode.terminated.tolist() == [False] * (limit - 1) + [True]
        assert (episode.roles == roles).all()


# ====================================================================================
# BUFFER TESTS
# ====================================================================================
class TestEpisodeBuffer:
    """Tests for FIFO storage."""

    def test_push_to_empty(self) -> None:
        """One push gives size one."""
        buffer = EpisodeBuffer(episode_limit=5, capacity=3)

        push_episode(buffer, _episode(2))

        assert len(buffer) == 1

    def test_fifo_eviction(self) -> None:
        """Pushing capacity + 1 episodes drops the first."""
        buffer = EpisodeBuffer(episode_limit=5, capacity=3)
        for marker in range(4):
            buffer.push(_episode(2, marker=float(marker)))

        assert len(buffer) == 3
        assert buffer.total_pushed == 4
        assert [buffer.get_episode(i).rewards[0] for i in range(3)] == [1.0, 2.0, 3.0]

    def test_round_trip_identical(self) -> None:
        """A stored episode reads back bit-identical."""
        buffer = EpisodeBuffer(episode_limit=5)
        episode = _episode(3, marker=0.25)

        buffer.push(episode)
        stored = buffer.get_episode(0)

        fields = ("obs", "state", "avail", "actions", "roles", "rewards", "terminated")
        for name in fields:
            np.testing.assert_array_equal(getattr(stored, name), getattr(episode, name))

    def test_stored_data_never_mutated(self, rng: np.random.Generator) -> None:
        """Callers cannot change stored episodes through pushes or samples."""
        buffer = EpisodeBuffer(episode_limit=5)
        episode = _episode(2, marker=1.0)
        buffer.push(episode)

        episode.rewards[:] = -5.0
        batch = buffer.sample(1, rng)
        batch.rewards[:] = -7.0
        buffer.get_episode(0).rewards[:] = -9.0

        assert buffer.get_episode(0).rewards.tolist() == [1.0, 1.0]

    def test_rejects_too_long(self) -> None:
        """Episodes longer than the limit are refused."""
        buffer = EpisodeBuffer(episode_limit=2)

        with pytest.raises(EpisodeTooLongError, match="exceeds limit"):
            buffer.push(_episode(3))

    def test_invalid_capacity(self) -> None:
        """Capacity must be positive."""
        with pytest.raises(ValueError, match="capacity"):
            EpisodeBuffer(episode_limit=2, capacity=0)


# ====================================================================================
# SAMPLING TESTS
# ====================================================================================
class TestSampling:
    """Tests for uniform batch sampling."""

    def test_not_ready(self, rng: np.random.Generator) -> None:
        """Too few episodes raise BufferNotReadyError."""
        buffer = EpisodeBuffer(episode_limit=5)
        buffer.push(_episode(2))

        assert not buffer.can_sample(2)
        with pytest.raises(BufferNotReadyError, match="batch needs 2"):
            sample_batch(buffer, 2, rng)

    def test_single_episode_batch(self, rng: np.random.Generator) -> None:
        """A one-episode buffer returns that episode."""
        buffer = EpisodeBuffer(episode_limit=5)
        buffer.push(_episode(3, marker=2.0))

        batch = buffer.sample(1, rng)

        assert batch.batch_size == 1
        assert batch.rewards[0, :3].tolist() == [2.0, 2.0, 2.0]

    def test_batch_leading_dimension(self, rng: np.random.Generator) -> None:
        """A batch of 32 has leading dimension 32."""
        buffer = EpisodeBuffer(episode_limit=5)
        for _ in range(32):
            buffer.push(_episode(2))

        batch = buffer.sample(32, rng)

        assert batch.obs.shape[0] == 32
        assert batch.n_agents == N_AGENTS

    def test_uniform_frequencies(self, rng: np.random.Generator) -> None:
        """Every one of 10 episodes is drawn about equally often."""
        buffer = EpisodeBuffer(episode_limit=5)
        for marker in range(10):
            buffer.push(_episode(1, marker=float(marker)))

        draws = np.concatenate(
            [buffer.sample_indices(10, rng) for _ in range(SAMPLE_DRAWS // 10)]
        )
        counts = np.bincount(draws, minlength=10)

        sigma = np.sqrt(SAMPLE_DRAWS * 0.1 * 0.9)
        assert np.all(np.abs(counts - SAMPLE_DRAWS / 10) < 4 * sigma)


class TestEpisodeBatch:
    """Tests for padding and masks."""

    def test_padding_layout(self) -> None:
        """Short episodes are zero-padded with a prefix filled mask."""
        batch = EpisodeBatch.from_episodes([_episode(3, 1.0), _episode(1, 1.0)])

        assert batch.max_length == 3
        assert batch.obs.shape == (2, 4, N_AGENTS, OBS_DIM)
        assert batch.filled.tolist() == [[1, 1, 1, 0], [1, 0, 0, 0]]
        assert batch.lengths.tolist() == [3, 1]
        assert batch.rewards[1].tolist() == [1.0, 0.0, 0.0, 0.0]
        assert batch.obs[1, 2:].sum() == 0.0
        assert batch.avail[1, 2:].all()

    def test_filled_mask_is_prefix(self, effect_buffer: EpisodeBuffer) -> None:
        """Filled entries never follow padding."""
        batch = effect_buffer.sample(4, np.random.default_rng(0))

        assert np.all(np.diff(batch.filled, axis=1) <= 0)

    def test_empty_batch_rejected(self) -> None:
        """Zero episodes cannot be batched."""
        with pytest.raises(ValueError, match="zero episodes"):
            EpisodeBatch.from_episodes([])
