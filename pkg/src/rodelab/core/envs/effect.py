"""Effect game: actions grouped by identical effects on observation and reward."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rodelab.core.envs.base import EnvSpec, MultiAgentEnv
from rodelab.core.envs.config import EffectGameConfig


class EffectGame(MultiAgentEnv):
    """Each action shifts its agent's observation by its group's delta.

    Taking an action of group ``g`` moves the agent's observation by
    ``delta_g`` plus Gaussian noise with ``sigma = noise_scale * ||delta_g||``
    and adds ``w_g`` to the shared reward. The group labels are exposed only
    through ``ground_truth_partition`` for evaluation.
    """

    def __init__(
        self, config: EffectGameConfig | None = None, seed: int | None = None
    ) -> None:
        self.config = config or EffectGameConfig()
        cfg = self.config
        self.deltas = np.asarray(cfg.deltas, dtype=np.float64)
        self.reward_weights = np.asarray(cfg.reward_weights, dtype=np.float64)
        self.noise_sigma = cfg.noise_scale * np.linalg.norm(self.deltas, axis=1)
        spec = EnvSpec(
            n_agents=cfg.n_agents,
            action_count=cfg.action_count,
            obs_dim=cfg.obs_dim,
            state_dim=cfg.n_agents * cfg.obs_dim,
            episode_limit=cfg.horizon,
        )
        super().__init__(spec, seed)
        self._positions = np.zeros((cfg.n_agents, cfg.obs_dim))

    @property
    def ground_truth_partition(self) -> NDArray[np.int64]:
        """Group label of every action."""
        return np.arange(self.spec.action_count) // self.config.actions_per_group

    def action_group(self, action: int) -> int:
        """Effect group of ``action``."""
        return int(action) // self.config.actions_per_group

    def observe(self, agent: int) -> NDArray[np.float64]:
        """The agent's accumulated position."""
        return self._positions[agent].copy()

    def get_state(self) -> NDArray[np.float64]:
        """All positions, flattened."""
        return self._positions.reshape(-1).copy()

    def _reset_dynamics(self) -> None:
        self._positions = np.zeros((self.config.n_agents, self.config.obs_dim))

    def _apply_actions(self, actions: NDArray[np.int64]) -> tuple[float, bool, bool]:
        groups = actions // self.config.actions_per_group
        noise = self._rng.standard_normal(self._positions.shape)
        self._positions += self.deltas[groups] + noise * self.noise_sigma[groups, None]
        return float(self.reward_weights[groups].sum()), False, False
