"""State-conditioned monotonic mixing network."""

from __future__ import annotations

import numpy as np

from rodelab.config.constants import MIXER_EMBED_DIM
from rodelab.core.nets.layers import MLP, Linear
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.tensor import (
    ShapeError,
    Value,
    absolute,
    add,
    as_value,
    matmul,
    relu,
    reshape,
)


class MonotonicMixer(Module):
    """Combine per-agent utilities into a joint value.

    Hypernetworks read the global state and emit the mixing weights; weights
    pass through ``abs`` so the joint value is nondecreasing in every agent's
    utility.

    Attributes:
        hyper_w1: State to ``n_agents * embed_dim`` first-layer weights.
        hyper_b1: State to first-layer bias.
        hyper_w2: State to second-layer weights.
        hyper_b2: Two-layer state network producing the output bias.

    """

    def __init__(
        self,
        n_agents: int,
        state_dim: int,
        rng: np.random.Generator,
        embed_dim: int = MIXER_EMBED_DIM,
    ) -> None:
        self.n_agents = n_agents
        self.state_dim = state_dim
        self.embed_dim = embed_dim
        self.hyper_w1 = Linear(state_dim, n_agents * embed_dim, rng)
        self.hyper_b1 = Linear(state_dim, embed_dim, rng)
        self.hyper_w2 = Linear(state_dim, embed_dim, rng)
        self.hyper_b2 = MLP(state_dim, embed_dim, 1, rng)

    def __call__(
        self, agent_qs: Value | np.ndarray, state: Value | np.ndarray
    ) -> Value:
        """Mix ``agent_qs (..., n)`` under ``state (..., state_dim)`` into ``(...)``."""
        agent_qs, state = as_value(agent_qs), as_value(state)
        if agent_qs.ndim == 0 or agent_qs.shape[-1] != self.n_agents:
            msg = (
                f"Mixer expects {self.n_agents} agent values, "
                f"got shape {agent_qs.shape}"
            )
            raise ShapeError(msg)
        lead = agent_qs.shape[:-1]
        if state.shape[-1:] != (self.state_dim,) or state.shape[:-1] != lead:
            msg = (
                f"State shape {state.shape} does not match agent values "
                f"{agent_qs.shape}"
            )
            raise ShapeError(msg)
        n, h = self.n_agents, self.embed_dim
        qs = reshape(agent_qs, (-1, 1, n))
        s = reshape(state, (-1, self.state_dim))
        w1 = reshape(absolute(self.hyper_w1(s)), (-1, n, h))
        b1 = reshape(self.hyper_b1(s), (-1, 1, h))
        hidden = relu(add(matmul(qs, w1), b1))
        w2 = reshape(absolute(self.hyper_w2(s)), (-1, h, 1))
        b2 = reshape(self.hyper_b2(s), (-1, 1, 1))
        q_tot = add(matmul(hidden, w2), b2)
        return reshape(q_tot, lead)


def mixer_forward(
    mixer: MonotonicMixer,
    per_agent_q: Value | np.ndarray,
    state: Value | np.ndarray,
) -> Value:
    """Joint value from per-agent values and the global state."""
    return mixer(per_agent_q, state)
