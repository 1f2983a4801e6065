"""Pytest configuration and shared fixtures."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from rodelab.core.action_repr.model import ActionRepresentationTable
from rodelab.core.envs.config import EffectGameConfig, MatrixGameConfig
from rodelab.core.envs.effect import EffectGame
from rodelab.core.envs.matrix import MatrixGame
from rodelab.core.replay.buffer import Episode, EpisodeBuffer
from rodelab.core.roles.model import RoleSet
from rodelab.core.trainer.agent import RodeAgent
from rodelab.core.trainer.config import TrainConfig
from rodelab.core.trainer.rollout import run_random_episode

TINY_REPR_DIM = 4


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> TrainConfig:
    """Training config small enough to finish in well under a second per phase."""
    return TrainConfig(
        total_steps=60,
        repr_steps=20,
        role_interval=2,
        n_clusters=2,
        repr_dim=TINY_REPR_DIM,
        epsilon_anneal_steps=20,
        batch_size=2,
        buffer_capacity=64,
        target_update_interval=4,
        eval_interval=30,
        eval_episodes=3,
        log_interval=10,
    )


@pytest.fixture
def matrix_env() -> MatrixGame:
    """Default 2-agent, 3-action matrix game."""
    return MatrixGame(MatrixGameConfig(), seed=0)


@pytest.fixture
def effect_config() -> EffectGameConfig:
    """Small noiseless effect game: 2 groups of 2 actions, horizon 4."""
    return EffectGameConfig(
        n_agents=2,
        n_groups=2,
        actions_per_group=2,
        obs_dim=3,
        noise_scale=0.0,
        horizon=4,
    )


@pytest.fixture
def effect_env(effect_config: EffectGameConfig) -> EffectGame:
    """Effect game built from ``effect_config``."""
    return EffectGame(effect_config, seed=0)


@pytest.fixture
def effect_agent(
    effect_env: EffectGame,
    tiny_config: TrainConfig,
    rng: np.random.Generator,
) -> RodeAgent:
    """Untrained agent with a random table and two disjoint roles."""
    a = effect_env.spec.action_count
    table = ActionRepresentationTable(rng.standard_normal((a, TINY_REPR_DIM)))
    masks = np.zeros((2, a), dtype=bool)
    masks[0, : a // 2] = True
    masks[1, a // 2 :] = True
    config = replace(tiny_config, repr_steps=0)
    return RodeAgent.build(effect_env.spec, config, table, RoleSet(masks), rng)


@pytest.fixture
def effect_episodes(effect_env: EffectGame, rng: np.random.Generator) -> list[Episode]:
    """Eight random episodes from the effect game."""
    return [run_random_episode(effect_env, rng)[0] for _ in range(8)]


@pytest.fixture
def effect_buffer(
    effect_env: EffectGame, effect_episodes: list[Episode]
) -> EpisodeBuffer:
    """Buffer holding ``effect_episodes``."""
    buffer = EpisodeBuffer(effect_env.spec.episode_limit, capacity=32)
    for episode in effect_episodes:
        buffer.push(episode)
    return buffer
