"""Per-episode updates of the selector and role policies."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from rodelab.core.numerics.tensor import Value
from rodelab.core.policies.loss import policy_loss
from rodelab.core.replay.buffer import EpisodeBatch, EpisodeBuffer
from rodelab.core.selector.loss import selector_loss
from rodelab.core.trainer.agent import Optimizers, RodeAgent

logger = logging.getLogger(__name__)


class NonFiniteLossError(RuntimeError):
    """A loss became NaN or infinite; training is aborted."""


def check_finite(name: str, value: float, step: int) -> None:
    """Raise ``NonFiniteLossError`` for NaN or infinite losses."""
    if not np.isfinite(value):
        msg = f"{name} loss is {value} at environment step {step}; aborting run"
        raise NonFiniteLossError(msg)


@dataclass
class UpdateResult:
    """Losses of one update pair.

    Both are None when the buffer was not ready; ``selector_loss`` is always
    None for flat agents.
    """

    selector_loss: float | None = None
    policy_loss: float | None = None


class HierarchyLearner:
    """One selector update and one policy update per call.

    Each loss samples its own batch. Targets are synced every
    ``target_update_interval`` update pairs. Flat agents skip the selector
    update.
    """

    def __init__(self, agent: RodeAgent) -> None:
        self.agent = agent
        self.optimizers = Optimizers.for_agent(agent)
        self.updates = 0

    def selector_loss(self, batch: EpisodeBatch) -> Value:
        """Selector TD loss on ``batch``."""
        agent = self.agent
        cfg = agent.config
        return selector_loss(
            agent.selector,
            batch,
            agent.role_reps,
            cfg.role_interval,
            cfg.gamma,
            action_count=agent.spec.action_count,
            action_table=agent.input_table,
            discounted=cfg.discounted_selector_targets,
        )

    def policy_loss(self, batch: EpisodeBatch) -> Value:
        """Role-policy TD loss on ``batch``."""
        agent = self.agent
        cfg = agent.config
        return policy_loss(
            agent.policies,
            batch,
            agent.roleset,
            agent.action_table,
            cfg.gamma,
            input_table=agent.input_table,
            unconstrained_bootstrap=cfg.unconstrained_bootstrap,
        )

    def update(
        self, buffer: EpisodeBuffer, rng: np.random.Generator, step: int
    ) -> UpdateResult:
        """Apply both updates if the buffer can fill a batch.

        Raises:
            NonFiniteLossError: If either loss is not finite.

        """
        batch_size = self.agent.config.batch_size
        if not buffer.can_sample(batch_size):
            return UpdateResult()

        opt = self.optimizers
        sel_value = None
        if not self.agent.flat:
            opt.selector.zero_grad()
            sel = self.selector_loss(buffer.sample(batch_size, rng))
            sel_value = sel.item()
            check_finite("selector", sel_value, step)
            sel.backward()
            opt.selector.step()

        opt.policies.zero_grad()
        pol = self.policy_loss(buffer.sample(batch_size, rng))
        pol_value = pol.item()
        check_finite("policy", pol_value, step)
        pol.backward()
        opt.policies.step()

        self.updates += 1
        if self.updates % self.agent.config.target_update_interval == 0:
            self.agent.selector.sync_targets()
            self.agent.policies.sync_targets()
            logger.debug("Synced target networks after %d updates", self.updates)
        return UpdateResult(sel_value, pol_value)
