"""Role-selector temporal-difference loss over c-step windows."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rodelab.core.nets.encoder import build_agent_inputs
from rodelab.core.nets.losses import masked_td_loss
from rodelab.core.numerics.tape import no_grad
from rodelab.core.numerics.tensor import Value, gather, reshape, stack, take
from rodelab.core.replay.buffer import EpisodeBatch
from rodelab.core.selector.model import RoleSelector, SelectorNet, role_q_values


def selection_boundaries(length: int, interval: int) -> NDArray[np.int64]:
    """Steps ``0, c, 2c, ...`` below ``length``."""
    if interval < 1:
        msg = f"Role interval must be at least 1, got {interval}"
        raise ValueError(msg)
    return np.arange(0, length, interval, dtype=np.int64)


def window_targets(
    rewards: NDArray[np.float64],
    terminated: NDArray[np.bool_],
    filled: NDArray[np.float64],
    bootstrap: NDArray[np.float64],
    interval: int,
    gamma: float,
    *,
    discounted: bool = False,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """TD targets at every selection boundary.

    The target at boundary ``t`` is the in-window reward sum plus ``gamma``
    times ``bootstrap[t + c]``. The discounted form weights rewards by
    ``gamma ** t'`` and the bootstrap by ``gamma ** c``. The bootstrap is
    dropped when the window contains a terminal step.

    Args:
        rewards: ``(B, T+1)`` rewards, zero-padded.
        terminated: ``(B, T+1)`` termination flags.
        filled: ``(B, T+1)`` filled mask.
        bootstrap: ``(B, T+1)`` target-network joint values per step.
        interval: Role interval ``c``.
        gamma: Discount.
        discounted: Use the conventional discounted form.

    Returns:
        ``(targets, mask)``, each ``(B, n_boundaries)``.

    """
    steps = rewards.shape[1] - 1
    bounds = selection_boundaries(steps, interval)
    live = np.asarray(filled, dtype=np.float64) > 0
    clean_rewards = np.where(live, rewards, 0.0)
    ends = np.asarray(terminated, dtype=bool) & live
    weights = gamma ** np.arange(interval) if discounted else np.ones(interval)
    factor = gamma**interval if discounted else gamma

    targets = np.zeros((rewards.shape[0], len(bounds)))
    for col, t in enumerate(bounds):
        stop = min(t + interval, steps)
        span = stop - t
        window_sum = clean_rewards[:, t:stop] @ weights[:span]
        crossed = ends[:, t:stop].any(axis=1)
        tail = np.where(crossed, 0.0, bootstrap[:, min(t + interval, steps)])
        targets[:, col] = window_sum + factor * tail
    mask = np.asarray(filled, dtype=np.float64)[:, bounds]
    return targets, mask


def unroll_selector(
    selector: RoleSelector,
    inputs: NDArray[np.float64],
    obs: NDArray[np.float64],
    role_reps: NDArray[np.float64] | None,
) -> Value:
    """Role values at every step, ``(B, T+1, n, K)``."""
    b, steps, n = inputs.shape[:3]
    hidden = selector.initial_hidden(b, n)
    per_step = []
    for t in range(steps):
        z, hidden = selector(inputs[:, t], obs[:, t], hidden)
        per_step.append(role_q_values(z, role_reps))
    return stack(per_step, axis=1)


def selector_inputs(
    batch: EpisodeBatch,
    action_count: int,
    action_table: NDArray[np.float64] | None = None,
) -> NDArray[np.float64]:
    """Encoder inputs for every step of ``batch``."""
    prev = np.concatenate(
        [np.full_like(batch.actions[:, :1], -1), batch.actions[:, :-1]],
        axis=1,
    )
    return build_agent_inputs(
        batch.obs, prev, action_count, batch.n_agents, action_table
    )


def selector_loss(
    net: SelectorNet,
    batch: EpisodeBatch,
    role_reps: NDArray[np.float64] | None,
    interval: int,
    gamma: float,
    *,
    action_count: int,
    action_table: NDArray[np.float64] | None = None,
    discounted: bool = False,
) -> Value:
    """c-step TD loss of the joint role value at selection boundaries.

    The joint bootstrap takes each agent's greedy role under the target
    selector and mixes those values with the target mixer.

    Raises:
        ValueError: If ``interval`` is below 1.

    """
    bounds = selection_boundaries(batch.max_length, interval)
    inputs = selector_inputs(batch, action_count, action_table)

    q_all = unroll_selector(net.agent, inputs, batch.obs, role_reps)
    q_bounds = take(q_all, (slice(None), bounds))  # (B, nb, n, K)
    roles = batch.roles[:, bounds][..., None]
    q_taken = reshape(gather(q_bounds, roles, axis=-1), roles.shape[:-1])
    q_tot = net.mixer(q_taken, batch.state[:, bounds])

    with no_grad():
        q_target = unroll_selector(net.target_agent, inputs, batch.obs, role_reps).data
        bootstrap = net.target_mixer(q_target.max(axis=-1), batch.state).data

    targets, mask = window_targets(
        batch.rewards,
        batch.terminated,
        batch.filled,
        bootstrap,
        interval,
        gamma,
        discounted=discounted,
    )
    return masked_td_loss(q_tot, targets, mask)
