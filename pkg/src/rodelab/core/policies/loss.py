"""One-step TD loss for role policies."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rodelab.core.nets.losses import masked_td_loss
from rodelab.core.numerics.tape import no_grad
from rodelab.core.numerics.tensor import Value, gather, reshape, stack, take
from rodelab.core.policies.model import RolePolicies, RolePolicyNet, allowed_actions
from rodelab.core.replay.buffer import EpisodeBatch
from rodelab.core.roles.model import RoleSet
from rodelab.core.selector.loss import selector_inputs


def unroll_policies(
    policies: RolePolicies,
    inputs: NDArray[np.float64],
    roles: NDArray[np.int64],
    action_table: NDArray[np.float64] | None,
) -> Value:
    """Action values of the active role at every step, ``(B, T+1, n, A)``."""
    b, steps, n = inputs.shape[:3]
    hidden = policies.initial_hidden(b, n)
    per_step = []
    for t in range(steps):
        q, hidden = policies(inputs[:, t], hidden, roles[:, t], action_table)
        per_step.append(q)
    return stack(per_step, axis=1)


def td_targets(
    rewards: NDArray[np.float64],
    terminated: NDArray[np.bool_],
    bootstrap: NDArray[np.float64],
    gamma: float,
) -> NDArray[np.float64]:
    """``r + gamma * bootstrap`` with the bootstrap dropped at terminal steps."""
    return rewards + gamma * np.where(terminated, 0.0, bootstrap)


def policy_loss(
    net: RolePolicyNet,
    batch: EpisodeBatch,
    roleset: RoleSet,
    action_table: NDArray[np.float64] | None,
    gamma: float,
    *,
    input_table: NDArray[np.float64] | None = None,
    unconstrained_bootstrap: bool = False,
) -> Value:
    """One-step TD loss of the joint action value.

    The bootstrap maximises each agent's target value over the actions of
    the role active at the next step that are available there (or over all
    available actions with ``unconstrained_bootstrap``), then mixes.

    Args:
        net: Online and target networks.
        batch: Padded episodes with recorded roles.
        roleset: Role action spaces.
        action_table: Frozen representations for dot-product heads.
        gamma: Discount.
        input_table: Representations used to encode previous actions in
            transferable inputs.
        unconstrained_bootstrap: Ignore role spaces in the bootstrap max.

    """
    t_max = batch.max_length
    action_count = roleset.action_count
    inputs = selector_inputs(batch, action_count, input_table)

    q_all = unroll_policies(net.agent, inputs, batch.roles, action_table)
    q_steps = take(q_all, (slice(None), slice(0, t_max)))
    actions = batch.actions[:, :t_max][..., None]
    q_taken = reshape(gather(q_steps, actions, axis=-1), actions.shape[:-1])
    q_tot = net.mixer(q_taken, batch.state[:, :t_max])

    with no_grad():
        q_target = unroll_policies(
            net.target_agent, inputs, batch.roles, action_table
        ).data
        next_q = q_target[:, 1:]
        next_avail = batch.avail[:, 1:]
        if unconstrained_bootstrap:
            allowed = next_avail
        else:
            allowed, _ = allowed_actions(roleset, batch.roles[:, 1:], next_avail)
        allowed = np.where(allowed.any(axis=-1, keepdims=True), allowed, True)
        best = np.where(allowed, next_q, -np.inf).max(axis=-1)
        bootstrap = net.target_mixer(best, batch.state[:, 1:]).data

    targets = td_targets(
        batch.rewards[:, :t_max],
        batch.terminated[:, :t_max],
        bootstrap,
        gamma,
    )
    return masked_td_loss(q_tot, targets, batch.filled[:, :t_max])
