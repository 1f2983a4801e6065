"""Tests for role policies.

This test module covers:
- Per-role heads, the shared flat head and dot-product action values
- Role-restricted action masks and the empty-intersection fallback
- Epsilon-greedy action choice inside role spaces
- One-step TD targets and the policy loss
"""

from __future__ import annotations

import numpy as np
import pytest

from rodelab.core.nets.losses import masked_td_loss
from rodelab.core.numerics import Value, check_parameter_gradients
from rodelab.core.policies.loss import policy_loss, td_targets, unroll_policies
from rodelab.core.policies.model import (
    RolePolicies,
    action_q_values,
    allowed_actions,
    select_actions,
)
from rodelab.core.replay.buffer import Episode, EpisodeBatch
from rodelab.core.roles.model import RoleSet
from rodelab.core.selector.loss import selector_inputs
from rodelab.core.trainer.agent import RodeAgent

GAMMA = 0.9
EXACT_TOL = 1e-12
GRAD_TOL = 1e-5
ACTION_DRAWS = 10_000
RANDOM_NETS = 200


def _roles_3x6() -> RoleSet:
    return RoleSet(
        np.array(
            [
                [1, 1, 1, 0, 0, 0],
                [0, 0, 1, 1, 1, 1],
                [1, 0, 0, 0, 0, 1],
            ],
            dtype=bool,
        )
    )


def _loss(
    agent: RodeAgent, batch: EpisodeBatch, *, unconstrained: bool = False
) -> Value:
    return policy_loss(
        agent.policies,
        batch,
        agent.roleset,
        agent.action_table,
        GAMMA,
        input_table=agent.input_table,
        unconstrained_bootstrap=unconstrained,
    )


# ====================================================================================
# MODEL TESTS
# ====================================================================================
class TestRolePolicies:
    """Tests for the per-role heads."""

    def test_zero_z_gives_zero_values(self, rng: np.random.Generator) -> None:
        """Zero head weights give zero action values."""
        policies = RolePolicies(5, 2, 3, rng)
        for head in policies.heads:
            head.weight.data[...] = 0.0
            head.bias.data[...] = 0.0
        table = rng.standard_normal((6, 3))
        roles = np.array([0, 1, 1, 0])

        q, _ = policies(np.ones((4, 5)), policies.initial_hidden(4), roles, table)

        assert q.shape == (4, 6)
        assert not q.data.any()

    def test_each_agent_uses_its_role_head(self, rng: np.random.Generator) -> None:
        """The output of agent i is head[role_i] applied to its history."""
        policies = RolePolicies(5, 3, 4, rng, conventional=True)
        inputs = rng.standard_normal((2, 5))
        hidden = policies.initial_hidden(2)

        q, h = policies(inputs, hidden, np.array([2, 0]), None)

        np.testing.assert_allclose(q.data[0], policies.heads[2](h.data[0]).data)
        np.testing.assert_allclose(q.data[1], policies.heads[0](h.data[1]).data)

    def test_shared_head_ignores_roles(self, rng: np.random.Generator) -> None:
        """A shared head gives the same action values whatever the roles."""
        policies = RolePolicies(5, 3, 4, rng, conventional=True, shared=True)
        inputs = rng.standard_normal((3, 5))
        hidden = policies.initial_hidden(3)

        q_a, _ = policies(inputs, hidden, np.array([0, 1, 2]), None)
        q_b, _ = policies(inputs, hidden, np.array([2, 2, 0]), None)

        assert policies.n_roles == 1
        np.testing.assert_array_equal(q_a.data, q_b.data)

    def test_dot_product_with_table(self, rng: np.random.Generator) -> None:
        """Action values are z_tau dotted with every action representation."""
        policies = RolePolicies(5, 1, 3, rng)
        table = rng.standard_normal((6, 3))
        inputs = rng.standard_normal((1, 5))
        hidden = policies.initial_hidden(1)

        q, h = policies(inputs, hidden, np.array([0]), table)

        z = policies.heads[0](h.data).data
        np.testing.assert_allclose(q.data, z @ table.T, atol=EXACT_TOL)


# ====================================================================================
# MASKING TESTS
# ====================================================================================
class TestAllowedActions:
    """Tests for role-restricted availability."""

    def test_intersection(self) -> None:
        """Allowed actions are the role space intersected with availability."""
        avail = np.array([[True, False, True, True, True, True]])

        allowed, fell_back = allowed_actions(_roles_3x6(), np.array([0]), avail)

        assert np.flatnonzero(allowed[0]).tolist() == [0, 2]
        assert not fell_back[0]

    def test_empty_intersection_falls_back(self) -> None:
        """An empty intersection allows every available action."""
        avail = np.array([[False, True, True, True, True, False]])

        allowed, fell_back = allowed_actions(_roles_3x6(), np.array([2]), avail)

        assert fell_back[0]
        np.testing.assert_array_equal(allowed[0], avail[0])

    def test_masked_values(self) -> None:
        """Disallowed actions score -inf."""
        q = np.arange(6.0)[None]
        avail = np.ones((1, 6), dtype=bool)

        masked, _ = action_q_values(q, _roles_3x6(), np.array([1]), avail)

        assert np.isneginf(masked[0, :2]).all()
        assert masked[0, 5] == 5.0


class TestSelectActions:
    """Tests for action choice."""

    def test_greedy_never_picks_masked(self, rng: np.random.Generator) -> None:
        """Greedy choice stays inside role and availability masks."""
        roleset = _roles_3x6()
        for _ in range(RANDOM_NETS):
            q = rng.standard_normal((4, 6)) * 10
            roles = rng.integers(0, 3, 4)
            avail = rng.random((4, 6)) < 0.7
            avail[:, 0] = True

            actions, _ = select_actions(q, roleset, roles, avail, 0.0, rng)

            allowed, _ = allowed_actions(roleset, roles, avail)
            assert allowed[np.arange(4), actions].all()

    def test_greedy_is_argmax(self, rng: np.random.Generator) -> None:
        """Epsilon 0 returns the best allowed action."""
        q = np.array([[9.0, 1.0, 4.0, 8.0, 0.0, 0.0]])

        actions, fallbacks = select_actions(
            q, _roles_3x6(), np.array([1]), np.ones((1, 6), dtype=bool), 0.0, rng
        )

        assert actions.tolist() == [3]
        assert fallbacks == 0

    def test_uniform_over_allowed(self, rng: np.random.Generator) -> None:
        """With epsilon 1 and allowed {2, 5} both are drawn equally often."""
        roleset = RoleSet(
            np.array([[0, 0, 1, 0, 1, 1], [1, 1, 1, 1, 1, 1]], dtype=bool)
        )
        avail = np.tile([True, True, True, True, False, True], (ACTION_DRAWS, 1))
        q = np.zeros((ACTION_DRAWS, 6))

        actions, _ = select_actions(
            q, roleset, np.zeros(ACTION_DRAWS, dtype=np.int64), avail, 1.0, rng
        )

        assert set(actions.tolist()) == {2, 5}
        sigma = np.sqrt(ACTION_DRAWS * 0.25)
        assert abs((actions == 2).sum() - ACTION_DRAWS / 2) < 4 * sigma

    def test_fallback_counted(self, rng: np.random.Generator) -> None:
        """Agents whose role has nothing available are counted."""
        avail = np.array([[False, True, True, True, True, False]] * 2)

        _, fallbacks = select_actions(
            np.zeros((2, 6)), _roles_3x6(), np.array([2, 0]), avail, 0.0, rng
        )

        assert fallbacks == 1


# ====================================================================================
# LOSS TESTS
# ====================================================================================
class TestPolicyLoss:
    """Tests for the one-step policy loss."""

    def test_hand_example(self) -> None:
        """r = 1, gamma 0.9, bootstrap 2 and Q_tot 2.5 give (1 + 1.8 - 2.5)^2."""
        targets = td_targets(np.array([1.0]), np.array([False]), np.array([2.0]), GAMMA)

        loss = masked_td_loss(Value([2.5]), targets, np.ones(1))

        assert loss.item() == pytest.approx(0.09, abs=1e-9)

    def test_terminal_zero(self) -> None:
        """Zero reward at a terminal step with Q_tot 0 gives zero loss."""
        targets = td_targets(np.array([0.0]), np.array([True]), np.array([5.0]), GAMMA)

        assert masked_td_loss(Value([0.0]), targets, np.ones(1)).item() == 0.0

    def test_padding_invariance(
        self,
        effect_agent: RodeAgent,
        effect_episodes: list[Episode],
        rng: np.random.Generator,
    ) -> None:
        """Random padding contents leave the loss unchanged."""
        k = effect_agent.roleset.k
        a = effect_agent.spec.action_count
        short = effect_episodes[1]
        episodes = [
            effect_episodes[0],
            Episode(
                obs=short.obs[:3],
                state=short.state[:3],
                avail=short.avail[:3],
                actions=short.actions[:2],
                roles=short.roles[:2],
                rewards=short.rewards[:2],
                terminated=np.array([False, True]),
            ),
        ]
        batch = EpisodeBatch.from_episodes(episodes)
        clean = _loss(effect_agent, batch).item()

        pad = batch.filled == 0
        batch.rewards[pad] = rng.standard_normal(pad.sum())
        batch.actions[pad] = rng.integers(0, a, (pad.sum(), 2))
        batch.roles[pad] = rng.integers(0, k, (pad.sum(), 2))
        for i, length in enumerate(batch.lengths):
            for array in (batch.obs, batch.state):
                tail = array[i, length + 1 :]
                tail[...] = rng.standard_normal(tail.shape)

        assert _loss(effect_agent, batch).item() == pytest.approx(clean, abs=EXACT_TOL)

    def test_gradients(
        self,
        effect_agent: RodeAgent,
        effect_episodes: list[Episode],
        rng: np.random.Generator,
    ) -> None:
        """Policy and mixer gradients match central differences."""
        batch = EpisodeBatch.from_episodes(effect_episodes[:2])

        error = check_parameter_gradients(
            lambda: _loss(effect_agent, batch),
            effect_agent.policies.online_parameters(),
            max_coords=3,
            rng=rng,
        )

        assert error < GRAD_TOL

    def test_table_receives_no_gradient(
        self, effect_agent: RodeAgent, effect_episodes: list[Episode]
    ) -> None:
        """The frozen table is constant under the policy loss."""
        before = effect_agent.table.vectors.copy()
        batch = EpisodeBatch.from_episodes(effect_episodes[:2])

        _loss(effect_agent, batch).backward()

        np.testing.assert_array_equal(effect_agent.table.vectors, before)
        target = effect_agent.policies.target_agent
        assert all(not p.grad.any() for p in target.parameters())

    def test_unconstrained_bootstrap_not_smaller(
        self, effect_agent: RodeAgent, effect_episodes: list[Episode]
    ) -> None:
        """Bootstrapping over all actions can only raise the targets."""
        batch = EpisodeBatch.from_episodes(effect_episodes[:2])
        inputs = selector_inputs(batch, effect_agent.spec.action_count)
        q = unroll_policies(
            effect_agent.policies.target_agent,
            inputs,
            batch.roles,
            effect_agent.action_table,
        ).data
        allowed, _ = allowed_actions(effect_agent.roleset, batch.roles, batch.avail)

        constrained = np.where(allowed, q, -np.inf).max(axis=-1)
        unconstrained = np.where(batch.avail, q, -np.inf).max(axis=-1)

        assert np.all(unconstrained >= constrained)
        assert _loss(effect_agent, batch, unconstrained=True).item() >= 0.0
