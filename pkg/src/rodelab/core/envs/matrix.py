"""One-step cooperative matrix game."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rodelab.core.envs.base import EnvSpec, MultiAgentEnv
from rodelab.core.envs.config import MatrixGameConfig


class MatrixGame(MultiAgentEnv):
    """Agents pick simultaneously and receive ``payoff[a_1, ..., a_n]``.

    Observations and state are constant zeros, so the game tests pure
    coordination. An episode is won when the payoff equals the table optimum.
    """

    def __init__(
        self, config: MatrixGameConfig | None = None, seed: int | None = None
    ) -> None:
        self.config = config or MatrixGameConfig()
        self.payoff = self.config.payoff_array()
        spec = EnvSpec(
            n_agents=self.config.n_agents,
            action_count=self.config.n_actions,
            obs_dim=self.config.obs_dim,
            state_dim=self.config.obs_dim,
            episode_limit=1,
        )
        super().__init__(spec, seed)

    @property
    def optimal_payoff(self) -> float:
        """Best entry found by exhaustive enumeration."""
        return float(self.payoff.max())

    @property
    def mean_payoff(self) -> float:
        """Expected reward of uniformly random joint play."""
        return float(self.payoff.mean())

    def observe(self, agent: int) -> NDArray[np.float64]:  # noqa: ARG002
        """Constant zero observation."""
        return np.zeros(self.config.obs_dim)

    def get_state(self) -> NDArray[np.float64]:
        """Constant zero state."""
        return np.zeros(self.config.obs_dim)

    def _reset_dynamics(self) -> None:
        pass

    def _apply_actions(self, actions: NDArray[np.int64]) -> tuple[float, bool, bool]:
        reward = float(self.payoff[tuple(actions)])
        return reward, True, reward == self.optimal_payoff
