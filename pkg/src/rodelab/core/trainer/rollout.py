"""Episode collection for both training phases and for evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from rodelab.core.envs.base import MultiAgentEnv
from rodelab.core.nets.exploration import epsilon_greedy
from rodelab.core.policies.model import select_actions
from rodelab.core.replay.buffer import Episode, EpisodeBuilder
from rodelab.core.selector.model import select_roles
from rodelab.core.trainer.agent import RodeAgent


@dataclass
class EpisodeStats:
    """Summary of one rollout.

    Attributes:
        episode_return: Sum of rewards.
        won: Whether the episode was won.
        length: Primitive steps.
        selector_calls: Role selections made.
        role_counts: Selections per role, summed over agents.
        fallbacks: Steps where an agent's role had no available action.

    """

    episode_return: float
    won: bool
    length: int
    selector_calls: int = 0
    role_counts: NDArray[np.int64] = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64)
    )
    fallbacks: int = 0


def run_random_episode(
    env: MultiAgentEnv,
    rng: np.random.Generator,
    max_steps: int | None = None,
) -> tuple[Episode, EpisodeStats]:
    """Uniformly random available actions; every role is recorded as 0.

    An episode cut short by ``max_steps`` ends with its last step marked
    terminal, like an environment timeout.
    """
    _, _, avail = env.reset()
    n = env.spec.n_agents
    builder = EpisodeBuilder()
    roles = np.zeros(n, dtype=np.int64)
    steps = 0
    while not env.terminated and (max_steps is None or steps < max_steps):
        actions = epsilon_greedy(np.zeros(avail.shape), avail, 1.0, rng)
        transition = env.step(actions)
        builder.add(transition, roles)
        avail = transition.next_avail
        steps += 1
    episode = builder.finish()
    episode.terminated[-1] = True
    return episode, EpisodeStats(episode.episode_return, episode.won, episode.length)


def run_hierarchical_episode(
    env: MultiAgentEnv,
    agent: RodeAgent,
    epsilon: float,
    rng: np.random.Generator,
) -> tuple[Episode, EpisodeStats]:
    """Roll out the selector and role policies.

    Both encoders advance every step; roles are re-selected when
    ``t % c == 0`` and held in between.
    """
    _, obs, avail = env.reset()
    n = env.spec.n_agents
    interval = agent.config.role_interval
    sel_hidden = agent.selector.agent.initial_hidden(n)
    pol_hidden = agent.policies.agent.initial_hidden(n)
    prev_actions = np.full(n, -1, dtype=np.int64)
    roles = np.zeros(n, dtype=np.int64)
    role_counts = np.zeros(agent.roleset.k, dtype=np.int64)
    selector_calls = 0
    fallbacks = 0
    builder = EpisodeBuilder()

    while not env.terminated:
        inputs = agent.agent_inputs(obs, prev_actions)
        role_values, sel_hidden = agent.selector.act_values(
            inputs, obs, sel_hidden, agent.role_reps
        )
        if env.t % interval == 0:
            roles = select_roles(role_values, epsilon, rng, env.t, interval).roles
            role_counts += np.bincount(roles, minlength=agent.roleset.k)
            selector_calls += 1
        q, pol_hidden = agent.policies.act_values(
            inputs, pol_hidden, roles, agent.action_table
        )
        actions, fell_back = select_actions(
            q, agent.roleset, roles, avail, epsilon, rng
        )
        fallbacks += fell_back
        transition = env.step(actions)
        builder.add(transition, roles)
        obs, avail, prev_actions = transition.next_obs, transition.next_avail, actions

    episode = builder.finish()
    stats = EpisodeStats(
        episode_return=episode.episode_return,
        won=episode.won,
        length=episode.length,
        selector_calls=selector_calls,
        role_counts=role_counts,
        fallbacks=fallbacks,
    )
    return episode, stats
