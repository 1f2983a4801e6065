"""Role policies: shared history encoder with one linear head per role.

With a single shared head the policies no longer depend on the role, which
is the flat monotonic-mixing baseline.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import RNN_HIDDEN_DIM
from rodelab.core.nets.encoder import HistoryEncoder
from rodelab.core.nets.exploration import epsilon_greedy
from rodelab.core.nets.layers import Linear
from rodelab.core.nets.mixer import MonotonicMixer
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.tape import no_grad
from rodelab.core.numerics.tensor import (
    Parameter,
    Value,
    as_value,
    matmul,
    mul,
    reduce_sum,
    stack,
)
from rodelab.core.roles.model import RoleSet

logger = logging.getLogger(__name__)


class RolePolicies(Module):
    """History encoder plus independent per-role linear heads.

    Each head maps ``h_tau`` to ``z_tau`` (no hidden layer, no activation);
    action values are dot products with the frozen action representations.
    With ``conventional`` heads each role outputs one value per action
    directly instead. A ``shared`` head serves every role, so the output
    ignores ``roles``.
    """

    def __init__(
        self,
        input_dim: int,
        n_roles: int,
        out_dim: int,
        rng: np.random.Generator,
        *,
        conventional: bool = False,
        shared: bool = False,
        hidden_dim: int = RNN_HIDDEN_DIM,
    ) -> None:
        self.conventional = conventional
        self.shared = shared
        self.encoder = HistoryEncoder(input_dim, rng, hidden_dim)
        n_heads = 1 if shared else n_roles
        self.heads = [Linear(hidden_dim, out_dim, rng) for _ in range(n_heads)]

    @property
    def n_roles(self) -> int:
        """Number of heads; 1 when shared."""
        return len(self.heads)

    def initial_hidden(self, *lead: int) -> Value:
        """Zero hidden state."""
        return self.encoder.initial_hidden(*lead)

    def __call__(
        self,
        inputs: NDArray[np.float64],
        hidden: Value,
        roles: NDArray[np.int64],
        action_table: NDArray[np.float64] | None,
    ) -> tuple[Value, Value]:
        """Action values for each agent's assigned role, ``((..., A), hidden')``."""
        h = self.encoder(inputs, hidden)
        if self.shared:
            z = self.heads[0](h)
        else:
            outputs = stack([head(h) for head in self.heads], axis=-2)  # (..., K, out)
            roles = np.asarray(roles, dtype=np.int64)
            selector = np.eye(self.n_roles)[roles][..., None]
            z = reduce_sum(mul(outputs, selector), axis=-2)
        if self.conventional or action_table is None:
            return z, h
        return matmul(z, as_value(np.asarray(action_table).T)), h


class RolePolicyNet(Module):
    """Online and target role policies plus mixer."""

    def __init__(
        self,
        n_agents: int,
        state_dim: int,
        input_dim: int,
        n_roles: int,
        out_dim: int,
        rng: np.random.Generator,
        *,
        conventional: bool = False,
        shared: bool = False,
    ) -> None:
        self.agent = RolePolicies(
            input_dim, n_roles, out_dim, rng, conventional=conventional, shared=shared
        )
        self.mixer = MonotonicMixer(n_agents, state_dim, rng)
        self.target_agent = self.agent.clone()
        self.target_mixer = self.mixer.clone()

    def online_parameters(self) -> list[Parameter]:
        """Parameters updated by the policy loss."""
        return [*self.agent.parameters(), *self.mixer.parameters()]

    def sync_targets(self) -> None:
        """Copy online weights into the target networks."""
        self.target_agent.copy_from(self.agent)
        self.target_mixer.copy_from(self.mixer)

    def act_values(
        self,
        inputs: NDArray[np.float64],
        hidden: Value,
        roles: NDArray[np.int64],
        action_table: NDArray[np.float64] | None,
    ) -> tuple[NDArray[np.float64], Value]:
        """Untracked per-agent action values, ``((n, A), hidden')``."""
        with no_grad():
            q, hidden = self.agent(inputs, hidden, roles, action_table)
            return q.data.copy(), hidden


# ------------------ Action masking ------------------
def allowed_actions(
    roleset: RoleSet,
    roles: NDArray[np.int64],
    avail: NDArray[np.bool_],
) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    """Role-restricted availability with fallback to the full available set.

    Returns:
        ``(allowed, fell_back)`` where ``fell_back`` marks entries whose role
        space had no available action.

    """
    avail = np.asarray(avail, dtype=bool)
    allowed = roleset.masks[np.asarray(roles, dtype=np.int64)] & avail
    fell_back = ~allowed.any(axis=-1)
    allowed = np.where(fell_back[..., None], avail, allowed)
    return allowed, fell_back


def action_q_values(
    q: NDArray[np.float64],
    roleset: RoleSet,
    roles: NDArray[np.int64],
    avail: NDArray[np.bool_],
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Mask actions outside ``A_role & available`` to ``-inf``.

    Returns:
        ``(masked values, fell_back flags)``.

    """
    allowed, fell_back = allowed_actions(roleset, roles, avail)
    return np.where(allowed, q, -np.inf), fell_back


def select_actions(
    q: NDArray[np.float64],
    roleset: RoleSet,
    roles: NDArray[np.int64],
    avail: NDArray[np.bool_],
    epsilon: float,
    rng: np.random.Generator,
) -> tuple[NDArray[np.int64], int]:
    """Epsilon-greedy action per agent inside its role's available actions.

    Agents whose role has no available action choose from every available
    action; those events are logged and counted.

    Returns:
        ``(actions, fallback_count)``.

    """
    allowed, fell_back = allowed_actions(roleset, roles, avail)
    fallbacks = int(fell_back.sum())
    if fallbacks:
        logger.debug(
            "Role fallback for agents %s (roles %s)",
            np.flatnonzero(fell_back).tolist(),
            np.asarray(roles)[fell_back].tolist(),
        )
    return epsilon_greedy(q, allowed, epsilon, rng), fallbacks
