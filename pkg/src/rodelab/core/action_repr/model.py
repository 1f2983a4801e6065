"""Effect-based action representations.

An action encoder maps one-hot actions to ``d``-dimensional vectors. Two
predictors read ``[z_a | o_i | a_-i]`` and forecast the acting agent's next
observation and the shared reward; training both against the buffer shapes
the vectors so actions with similar effects land close together.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import (
    ACTION_REPR_DIM,
    BATCH_SIZE_EPISODES,
    EFFECT_LOSS_REWARD_WEIGHT,
    LEARNING_RATE,
    PREDICTOR_HIDDEN_DIM,
)
from rodelab.config.defaults import DEFAULT_GRAD_CLIP
from rodelab.core.nets.layers import MLP
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.optim import RMSprop
from rodelab.core.numerics.tape import no_grad
from rodelab.core.numerics.tensor import (
    Value,
    add,
    as_value,
    concat,
    mul,
    reduce_sum,
    reshape,
    squared_error,
    take,
)
from rodelab.core.replay.buffer import EpisodeBatch, EpisodeBuffer

logger = logging.getLogger(__name__)

OtherActionsMode = Literal["concat", "count"]


class FrozenTableError(RuntimeError):
    """The action representations were already frozen."""


# ------------------ Networks ------------------
class ActionEncoder(Module):
    """Two-layer map from one-hot actions to ``d``-dimensional vectors."""

    def __init__(
        self,
        action_count: int,
        rng: np.random.Generator,
        repr_dim: int = ACTION_REPR_DIM,
    ) -> None:
        self.action_count = action_count
        self.repr_dim = repr_dim
        self.net = MLP(action_count, 2 * repr_dim, repr_dim, rng)

    def encode(self) -> Value:
        """Representations of every action, ``(A, d)``."""
        return self.net(np.eye(self.action_count))

    def encode_action(self, action: int) -> Value:
        """Representation of a single action.

        Raises:
            IndexError: If ``action`` is outside ``[0, A)``.

        """
        if not 0 <= action < self.action_count:
            msg = f"Action {action} outside [0, {self.action_count})"
            raise IndexError(msg)
        one_hot = np.zeros(self.action_count)
        one_hot[action] = 1.0
        return self.net(one_hot)


def other_actions_encoding(
    actions: NDArray[np.int64],
    action_count: int,
    mode: OtherActionsMode = "concat",
) -> NDArray[np.float64]:
    """Encode every agent's teammates' actions.

    Args:
        actions: ``(..., n)`` joint actions.
        action_count: Number of actions.
        mode: ``concat`` lists the other agents' one-hots in agent order;
            ``count`` sums them into one ``A``-vector independent of team size.

    Returns:
        ``(..., n, (n-1)*A)`` for ``concat`` or ``(..., n, A)`` for ``count``.

    """
    actions = np.asarray(actions, dtype=np.int64)
    one_hot = np.eye(action_count)[actions]  # (..., n, A)
    n = actions.shape[-1]
    if mode == "count":
        return one_hot.sum(axis=-2, keepdims=True) - one_hot
    blocks = []
    for i in range(n):
        others = [one_hot[..., j, :] for j in range(n) if j != i]
        blocks.append(
            np.concatenate(others, axis=-1)
            if others
            else np.zeros((*actions.shape[:-1], 0))
        )
    return np.stack(blocks, axis=-2)


def other_actions_dim(n_agents: int, action_count: int, mode: OtherActionsMode) -> int:
    """Width of ``other_actions_encoding``."""
    return action_count if mode == "count" else (n_agents - 1) * action_count


class EffectPredictors(Module):
    """Observation predictor ``p_o`` and reward predictor ``p_r``."""

    def __init__(
        self,
        n_agents: int,
        action_count: int,
        obs_dim: int,
        rng: np.random.Generator,
        repr_dim: int = ACTION_REPR_DIM,
        hidden_dim: int = PREDICTOR_HIDDEN_DIM,
        other_actions: OtherActionsMode = "concat",
    ) -> None:
        self.n_agents = n_agents
        self.action_count = action_count
        self.obs_dim = obs_dim
        self.other_actions = other_actions
        others_dim = other_actions_dim(n_agents, action_count, other_actions)
        in_dim = repr_dim + obs_dim + others_dim
        self.obs_predictor = MLP(in_dim, hidden_dim, obs_dim, rng)
        self.reward_predictor = MLP(in_dim, hidden_dim, 1, rng)

    def __call__(
        self,
        z_taken: Value,
        obs: NDArray[np.float64],
        actions: NDArray[np.int64],
    ) -> tuple[Value, Value]:
        """Predict ``(next_obs (..., n, obs_dim), reward (..., n))``."""
        others = other_actions_encoding(actions, self.action_count, self.other_actions)
        inputs = concat([z_taken, as_value(obs), as_value(others)], axis=-1)
        pred_obs = self.obs_predictor(inputs)
        pred_rew = reshape(self.reward_predictor(inputs), pred_obs.shape[:-1])
        return pred_obs, pred_rew


# ------------------ Loss ------------------
def effect_loss_terms(
    pred_obs: Value,
    next_obs: NDArray[np.float64],
    pred_rew: Value,
    rewards: NDArray[np.float64],
    mask: NDArray[np.float64],
) -> tuple[Value, Value]:
    """Masked means of observation and reward prediction errors.

    Args:
        pred_obs: ``(B, T, n, obs_dim)`` predicted next observations.
        next_obs: True next observations, same shape.
        pred_rew: ``(B, T, n)`` predicted rewards.
        rewards: ``(B, T)`` shared rewards.
        mask: ``(B, T)`` filled mask.

    Returns:
        ``(observation term, reward term)``, each averaged over filled
        ``(sample, step, agent)`` entries.

    """
    mask = np.asarray(mask, dtype=np.float64)
    n = pred_rew.shape[-1]
    count = max(float(mask.sum()) * n, 1.0)
    agent_mask = mask[..., None]
    clean_obs = np.where(agent_mask[..., None] > 0, next_obs, 0.0)
    clean_rew = np.where(mask > 0, rewards, 0.0)[..., None]
    obs_err = reduce_sum(squared_error(pred_obs, clean_obs), axis=-1)
    rew_err = squared_error(pred_rew, clean_rew)
    obs_term = mul(reduce_sum(mul(obs_err, agent_mask)), 1.0 / count)
    rew_term = mul(reduce_sum(mul(rew_err, agent_mask)), 1.0 / count)
    return obs_term, rew_term


def effect_prediction_loss(
    pred_obs: Value,
    next_obs: NDArray[np.float64],
    pred_rew: Value,
    rewards: NDArray[np.float64],
    mask: NDArray[np.float64],
    lambda_e: float = EFFECT_LOSS_REWARD_WEIGHT,
) -> Value:
    """Observation error plus ``lambda_e`` times reward error."""
    obs_term, rew_term = effect_loss_terms(pred_obs, next_obs, pred_rew, rewards, mask)
    return add(obs_term, mul(rew_term, lambda_e))


def repr_loss(
    encoder: ActionEncoder,
    predictors: EffectPredictors,
    batch: EpisodeBatch,
    lambda_e: float = EFFECT_LOSS_REWARD_WEIGHT,
) -> Value:
    """Forward-model loss over a padded batch."""
    t = batch.max_length
    actions = batch.actions[:, :t]
    z_taken = take(encoder.encode(), actions)
    pred_obs, pred_rew = predictors(z_taken, batch.obs[:, :t], actions)
    return effect_prediction_loss(
        pred_obs,
        batch.obs[:, 1 : t + 1],
        pred_rew,
        batch.rewards[:, :t],
        batch.filled[:, :t],
        lambda_e,
    )


# ------------------ Frozen table ------------------
@dataclass(frozen=True)
class ActionRepresentationTable:
    """Immutable ``(A, d)`` action representations.

    Attributes:
        vectors: Read-only representation matrix.
        frozen: Always True once constructed through ``freeze``.

    """

    vectors: NDArray[np.float64]
    frozen: bool = True

    def __post_init__(self) -> None:
        """Copy and lock the matrix."""
        vectors = np.array(self.vectors, dtype=np.float64, copy=True)
        if vectors.ndim != 2:  # noqa: PLR2004
            msg = f"Representation table must be 2-D, got shape {vectors.shape}"
            raise ValueError(msg)
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def action_count(self) -> int:
        """Number of actions."""
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        """Representation dimension."""
        return int(self.vectors.shape[1])

    def as_value(self) -> Value:
        """Untracked value of the table; gradients never reach it."""
        return Value(self.vectors)


def freeze(encoder: ActionEncoder) -> ActionRepresentationTable:
    """Snapshot every action's representation into an immutable table."""
    with no_grad():
        vectors = encoder.encode().data
    return ActionRepresentationTable(vectors)


# ------------------ Learner ------------------
class ActionRepresentationLearner:
    """Trains the encoder and predictors, then freezes the table once."""

    def __init__(
        self,
        n_agents: int,
        action_count: int,
        obs_dim: int,
        rng: np.random.Generator,
        *,
        repr_dim: int = ACTION_REPR_DIM,
        lambda_e: float = EFFECT_LOSS_REWARD_WEIGHT,
        batch_size: int = BATCH_SIZE_EPISODES,
        lr: float = LEARNING_RATE,
        grad_clip: float | None = DEFAULT_GRAD_CLIP,
        other_actions: OtherActionsMode = "concat",
    ) -> None:
        self.encoder = ActionEncoder(action_count, rng, repr_dim)
        self.predictors = EffectPredictors(
            n_agents, action_count, obs_dim, rng, repr_dim, other_actions=other_actions
        )
        self.optimizer = RMSprop(
            [*self.encoder.parameters(), *self.predictors.parameters()],
            lr=lr,
            grad_clip=grad_clip,
        )
        self.lambda_e = lambda_e
        self.batch_size = batch_size
        self._table: ActionRepresentationTable | None = None

    @property
    def frozen(self) -> bool:
        """Whether ``freeze`` has been called."""
        return self._table is not None

    @property
    def table(self) -> ActionRepresentationTable:
        """The frozen table.

        Raises:
            RuntimeError: Before ``freeze``.

        """
        if self._table is None:
            msg = "Action representations are not frozen yet"
            raise RuntimeError(msg)
        return self._table

    def loss(self, batch: EpisodeBatch) -> Value:
        """Forward-model loss on ``batch``."""
        return repr_loss(self.encoder, self.predictors, batch, self.lambda_e)

    def train_step(
        self, buffer: EpisodeBuffer, rng: np.random.Generator
    ) -> float | None:
        """One RMSProp step on a sampled batch.

        Returns:
            The loss, or None when the buffer cannot fill a batch yet.

        Raises:
            FrozenTableError: After ``freeze``.

        """
        if self.frozen:
            msg = "Cannot train action representations after freeze"
            raise FrozenTableError(msg)
        if not buffer.can_sample(self.batch_size):
            return None
        batch = buffer.sample(self.batch_size, rng)
        self.optimizer.zero_grad()
        loss = self.loss(batch)
        value = loss.item()
        if np.isfinite(value):
            loss.backward()
            self.optimizer.step()
        return value

    def freeze(self) -> ActionRepresentationTable:
        """Freeze the representations.

        Raises:
            FrozenTableError: On a second call.

        """
        if self.frozen:
            msg = "Action representations are already frozen"
            raise FrozenTableError(msg)
        self._table = freeze(self.encoder)
        logger.info(
            "Froze %d action representations of dimension %d",
            self._table.action_count,
            self._table.dim,
        )
        return self._table


def train_repr_step(
    learner: ActionRepresentationLearner,
    buffer: EpisodeBuffer,
    rng: np.random.Generator,
) -> float | None:
    """One representation update; None when the buffer is not ready."""
    return learner.train_step(buffer, rng)


def encode_action(encoder: ActionEncoder, action: int) -> NDArray[np.float64]:
    """Representation of ``action`` as a plain array."""
    with no_grad():
        return encoder.encode_action(action).data.copy()
