"""Trajectory encoder and agent-input construction."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import RNN_HIDDEN_DIM
from rodelab.core.nets.layers import GRUCell, Linear
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.tensor import Value, relu


class HistoryEncoder(Module):
    """Linear layer, ReLU and GRU cell over per-step agent inputs."""

    def __init__(
        self,
        input_dim: int,
        rng: np.random.Generator,
        hidden_dim: int = RNN_HIDDEN_DIM,
    ) -> None:
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.fc = Linear(input_dim, hidden_dim, rng)
        self.rnn = GRUCell(hidden_dim, rng, hidden_dim)

    def initial_hidden(self, *lead: int) -> Value:
        """Zero hidden state."""
        return self.rnn.initial_hidden(*lead)

    def __call__(self, inputs: Value | np.ndarray, hidden: Value | np.ndarray) -> Value:
        """Return the new history embedding, which is also the next hidden state."""
        return self.rnn(relu(self.fc(inputs)), hidden)


def agent_input_dim(
    obs_dim: int,
    action_count: int,
    n_agents: int,
    repr_dim: int | None = None,
) -> int:
    """Width of the encoder input.

    With ``repr_dim`` the input is ``[obs | z_prev]``; otherwise
    ``[obs | one-hot(prev action) | one-hot(agent id)]``.
    """
    if repr_dim is not None:
        return obs_dim + repr_dim
    return obs_dim + action_count + n_agents


def build_agent_inputs(
    obs: NDArray[np.float64],
    prev_actions: NDArray[np.int64],
    action_count: int,
    n_agents: int,
    action_table: NDArray[np.float64] | None = None,
) -> NDArray[np.float64]:
    """Assemble encoder inputs for every agent.

    Args:
        obs: ``(..., n_agents, obs_dim)`` observations.
        prev_actions: ``(..., n_agents)`` previous actions, ``-1`` at episode start.
        action_count: Number of discrete actions.
        n_agents: Number of agents.
        action_table: Frozen ``(action_count, d)`` representations; when given,
            the previous action is encoded by its representation and agent ids
            are omitted.

    Returns:
        ``(..., n_agents, input_dim)`` float array.

    """
    obs = np.asarray(obs, dtype=np.float64)
    prev = np.asarray(prev_actions, dtype=np.int64)
    valid = (prev >= 0)[..., None]
    safe = np.where(prev >= 0, prev, 0)
    if action_table is not None:
        table = np.asarray(action_table, dtype=np.float64)
        prev_feat = table[safe] * valid
        return np.concatenate([obs, prev_feat], axis=-1)
    prev_feat = np.eye(action_count)[safe] * valid
    ids = np.broadcast_to(np.eye(n_agents), (*obs.shape[:-2], n_agents, n_agents))
    return np.concatenate([obs, prev_feat, ids], axis=-1)
