"""Role selector: history encoder, role head and mixing network."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import RNN_HIDDEN_DIM
from rodelab.core.nets.encoder import HistoryEncoder
from rodelab.core.nets.exploration import epsilon_greedy
from rodelab.core.nets.layers import MLP
from rodelab.core.nets.mixer import MonotonicMixer
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.tape import no_grad
from rodelab.core.numerics.tensor import Parameter, Value, as_value, matmul

logger = logging.getLogger(__name__)

SelectorKind = Literal["recurrent", "feedforward"]


class RoleSelector(Module):
    """Per-agent role scorer shared across agents.

    The recurrent form encodes ``[obs | prev action | agent id]`` histories
    with a linear layer and GRU, then a two-layer head produces ``z_tau``.
    The feedforward form scores from the current observation alone.
    ``out_dim`` is the representation size for dot-product role values, or
    the role count for conventional per-role outputs.
    """

    def __init__(
        self,
        input_dim: int,
        obs_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        *,
        kind: SelectorKind = "recurrent",
        hidden_dim: int = RNN_HIDDEN_DIM,
    ) -> None:
        self.kind = kind
        self.hidden_dim = hidden_dim
        if kind == "recurrent":
            self.encoder = HistoryEncoder(input_dim, rng, hidden_dim)
            self.head = MLP(hidden_dim, hidden_dim, out_dim, rng)
        elif kind == "feedforward":
            self.encoder = None
            self.head = MLP(obs_dim, hidden_dim, out_dim, rng)
        else:
            msg = f"Unknown selector kind '{kind}'"
            raise ValueError(msg)

    def initial_hidden(self, *lead: int) -> Value:
        """Zero hidden state (unused by the feedforward form)."""
        return Value(np.zeros((*lead, self.hidden_dim)))

    def __call__(
        self,
        inputs: NDArray[np.float64],
        obs: NDArray[np.float64],
        hidden: Value,
    ) -> tuple[Value, Value]:
        """Return ``(z_tau or role scores, next hidden)``."""
        if self.encoder is None:
            return self.head(obs), hidden
        h = self.encoder(inputs, hidden)
        return self.head(h), h


def encode_history_selector(
    selector: RoleSelector,
    inputs: NDArray[np.float64],
    hidden: Value,
) -> tuple[Value, Value]:
    """One recurrent step of the selector's encoder: ``(h_tau, hidden')``."""
    if selector.encoder is None:
        msg = "The feedforward selector has no history encoder"
        raise ValueError(msg)
    h = selector.encoder(inputs, hidden)
    return h, h


def role_q_values(z_tau: Value, role_reps: NDArray[np.float64] | None) -> Value:
    """Dot products of ``z_tau (..., d)`` with detached role representations.

    With ``role_reps`` None, ``z_tau`` already holds per-role values.
    """
    if role_reps is None:
        return z_tau
    return matmul(z_tau, as_value(np.asarray(role_reps).T))


class SelectorNet(Module):
    """Online and target selector plus mixer."""

    def __init__(
        self,
        n_agents: int,
        state_dim: int,
        input_dim: int,
        obs_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        *,
        kind: SelectorKind = "recurrent",
    ) -> None:
        self.agent = RoleSelector(input_dim, obs_dim, out_dim, rng, kind=kind)
        self.mixer = MonotonicMixer(n_agents, state_dim, rng)
        self.target_agent = self.agent.clone()
        self.target_mixer = self.mixer.clone()

    def online_parameters(self) -> list[Parameter]:
        """Parameters updated by the selector loss."""
        return [*self.agent.parameters(), *self.mixer.parameters()]

    def sync_targets(self) -> None:
        """Copy online weights into the target networks."""
        self.target_agent.copy_from(self.agent)
        self.target_mixer.copy_from(self.mixer)

    def act_values(
        self,
        inputs: NDArray[np.float64],
        obs: NDArray[np.float64],
        hidden: Value,
        role_reps: NDArray[np.float64] | None,
    ) -> tuple[NDArray[np.float64], Value]:
        """Untracked per-agent role values for acting, ``((n, K), hidden')``."""
        with no_grad():
            z, hidden = self.agent(inputs, obs, hidden)
            return role_q_values(z, role_reps).data.copy(), hidden


@dataclass(frozen=True)
class RoleAssignment:
    """Roles chosen at one selection boundary.

    Attributes:
        roles: ``(n,)`` role index per agent.
        t: Primitive step at which the roles were chosen.
        interval: Steps the roles stay active.

    """

    roles: NDArray[np.int64]
    t: int
    interval: int

    def active_at(self, t: int) -> bool:
        """Whether the assignment covers step ``t``."""
        return self.t <= t < self.t + self.interval


def select_roles(
    role_values: NDArray[np.float64],
    epsilon: float,
    rng: np.random.Generator,
    t: int = 0,
    interval: int = 1,
) -> RoleAssignment:
    """Epsilon-greedy role per agent over all roles (ties to the lowest index)."""
    values = np.atleast_2d(role_values)
    roles = epsilon_greedy(values, np.ones_like(values, dtype=bool), epsilon, rng)
    return RoleAssignment(roles=roles, t=t, interval=interval)
