"""Role-based agent: frozen representations, roles, selector and policies."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from rodelab.core.action_repr.model import ActionRepresentationTable
from rodelab.core.envs.base import EnvSpec
from rodelab.core.nets.encoder import agent_input_dim, build_agent_inputs
from rodelab.core.numerics.optim import RMSprop
from rodelab.core.policies.model import RolePolicyNet
from rodelab.core.roles.model import RoleSet
from rodelab.core.selector.model import SelectorNet
from rodelab.core.trainer.config import TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class RodeAgent:
    """Everything needed to act and learn in the hierarchy phase.

    Attributes:
        spec: Environment the agent acts in.
        config: Training configuration.
        table: Frozen action representations (None for variant D).
        roleset: Role action spaces.
        selector: Role selector networks.
        policies: Role policy networks.

    """

    spec: EnvSpec
    config: TrainConfig
    table: ActionRepresentationTable | None
    roleset: RoleSet
    selector: SelectorNet
    policies: RolePolicyNet

    @classmethod
    def build(
        cls,
        spec: EnvSpec,
        config: TrainConfig,
        table: ActionRepresentationTable | None,
        roleset: RoleSet,
        rng: np.random.Generator,
    ) -> RodeAgent:
        """Create fresh networks sized for ``spec``, ``table`` and ``roleset``."""
        conventional = config.ablation.no_action_repr or table is None
        if config.transferable_inputs and table is None:
            msg = "transferable_inputs needs a frozen representation table"
            raise ValueError(msg)
        transferable = config.transferable_inputs and table is not None
        repr_dim = table.dim if transferable else None
        input_dim = agent_input_dim(
            spec.obs_dim, spec.action_count, spec.n_agents, repr_dim
        )
        d = table.dim if table is not None else config.repr_dim
        selector = SelectorNet(
            spec.n_agents,
            spec.state_dim,
            input_dim,
            spec.obs_dim,
            roleset.k if conventional else d,
            rng,
            kind=config.selector,
        )
        policies = RolePolicyNet(
            spec.n_agents,
            spec.state_dim,
            input_dim,
            roleset.k,
            spec.action_count if conventional else d,
            rng,
            conventional=conventional,
            shared=config.ablation.flat,
        )
        return cls(spec, config, table, roleset, selector, policies)

    @property
    def conventional(self) -> bool:
        """Per-role and per-action outputs instead of dot products."""
        return self.policies.agent.conventional

    @property
    def flat(self) -> bool:
        """One shared head over the full action space; roles play no part."""
        return self.policies.agent.shared

    @property
    def role_reps(self) -> NDArray[np.float64] | None:
        """Role representations, or None for conventional selector outputs."""
        if self.conventional or self.table is None:
            return None
        return self.roleset.representations(self.table)

    @property
    def action_table(self) -> NDArray[np.float64] | None:
        """Representation matrix for dot-product policy heads."""
        if self.conventional or self.table is None:
            return None
        return self.table.vectors

    @property
    def input_table(self) -> NDArray[np.float64] | None:
        """Representation matrix used to encode previous actions."""
        if self.config.transferable_inputs and self.table is not None:
            return self.table.vectors
        return None

    def agent_inputs(
        self,
        obs: NDArray[np.float64],
        prev_actions: NDArray[np.int64],
    ) -> NDArray[np.float64]:
        """Encoder inputs for one step of every agent."""
        return build_agent_inputs(
            obs,
            prev_actions,
            self.spec.action_count,
            self.spec.n_agents,
            self.input_table,
        )

    def with_environment(
        self,
        spec: EnvSpec,
        table: ActionRepresentationTable | None,
        roleset: RoleSet,
    ) -> RodeAgent:
        """Same trained networks acting in another environment of the family."""
        if roleset.k != self.roleset.k:
            msg = f"Role count changed from {self.roleset.k} to {roleset.k}"
            raise ValueError(msg)
        return RodeAgent(
            spec, self.config, table, roleset, self.selector, self.policies
        )


@dataclass
class Optimizers:
    """One optimiser per learner head."""

    selector: RMSprop
    policies: RMSprop

    @classmethod
    def for_agent(cls, agent: RodeAgent) -> Optimizers:
        """RMSProp over each head's online parameters."""
        cfg = agent.config

        def make(params: list) -> RMSprop:
            return RMSprop(
                params,
                lr=cfg.lr,
                alpha=cfg.rmsprop_alpha,
                eps=cfg.rmsprop_eps,
                grad_clip=cfg.grad_clip,
            )

        return cls(
            selector=make(agent.selector.online_parameters()),
            policies=make(agent.policies.online_parameters()),
        )

    @property
    def steps(self) -> int:
        """Total optimiser steps taken."""
        return self.selector.steps + self.policies.steps
