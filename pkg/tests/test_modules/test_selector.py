"""Tests for the role selector.

This test module covers:
- Recurrent and feedforward selectors and role values
- Epsilon-greedy role selection and assignment windows
- Window targets on hand examples, terminals and the discounted form
- The c-step loss: one-step equivalence, padding and gradients
"""

from __future__ import annotations

import numpy as np
import pytest

from rodelab.core.nets.losses import masked_td_loss
from rodelab.core.numerics import Value, check_parameter_gradients, no_grad
from rodelab.core.replay.buffer import Episode, EpisodeBatch
from rodelab.core.selector.loss import (
    selection_boundaries,
    selector_inputs,
    selector_loss,
    unroll_selector,
    window_targets,
)
from rodelab.core.selector.model import (
    RoleAssignment,
    RoleSelector,
    SelectorNet,
    encode_history_selector,
    role_q_values,
    select_roles,
)
from rodelab.core.trainer.agent import RodeAgent

GAMMA = 0.9
EXACT_TOL = 1e-12
GRAD_TOL = 1e-5
ROLE_DRAWS = 10_000


def _scalar_window(
    rewards: list[float], *, terminal: bool, bootstrap: float, discounted: bool = False
) -> float:
    """Target of a single boundary whose window spans ``rewards``."""
    steps = len(rewards)
    r = np.array([[*rewards, 0.0]])
    term = np.zeros((1, steps + 1), dtype=bool)
    term[0, steps - 1] = terminal
    filled = np.array([[1.0] * steps + [0.0]])
    boot = np.zeros((1, steps + 1))
    boot[0, steps] = bootstrap
    targets, _ = window_targets(
        r, term, filled, boot, steps, GAMMA, discounted=discounted
    )
    return float(targets[0, 0])


def _one_step_loss(net: SelectorNet, batch: EpisodeBatch, agent: RodeAgent) -> float:
    """Independent one-step TD loss over roles at every filled step."""
    inputs = selector_inputs(batch, agent.spec.action_count, agent.input_table)
    t_max = batch.max_length
    with no_grad():
        q = unroll_selector(net.agent, inputs, batch.obs, agent.role_reps).data
        chosen = np.take_along_axis(q, batch.roles[..., None], axis=-1)[..., 0]
        q_tot = net.mixer(chosen, batch.state).data
        q_next = unroll_selector(
            net.target_agent, inputs, batch.obs, agent.role_reps
        ).data
        boot = net.target_mixer(q_next.max(axis=-1), batch.state).data
    total, count = 0.0, 0.0
    for b in range(batch.batch_size):
        for t in range(t_max):
            if batch.filled[b, t] == 0:
                continue
            target = batch.rewards[b, t]
            if not batch.terminated[b, t]:
                target += GAMMA * boot[b, t + 1]
            total += (q_tot[b, t] - target) ** 2
            count += 1
    return total / count


def _fuzz_padding(
    batch: EpisodeBatch, rng: np.random.Generator, k: int, a: int
) -> None:
    pad = batch.filled == 0
    n = batch.n_agents
    batch.rewards[pad] = rng.standard_normal(pad.sum())
    batch.terminated[pad] = rng.random(pad.sum()) < 0.5
    batch.actions[pad] = rng.integers(0, a, (pad.sum(), n))
    batch.roles[pad] = rng.integers(0, k, (pad.sum(), n))
    for i, length in enumerate(batch.lengths):
        for array in (batch.obs, batch.state):
            tail = array[i, length + 1 :]
            tail[...] = rng.standard_normal(tail.shape)


def _roled_episodes(
    episodes: list[Episode], rng: np.random.Generator, k: int
) -> list[Episode]:
    """Copies of ``episodes`` with random roles held for two steps."""
    out = []
    for ep in episodes:
        copy = ep.copy()
        held = rng.integers(0, k, ((ep.length + 1) // 2, ep.actions.shape[1]))
        copy.roles[...] = np.repeat(held, 2, axis=0)[: ep.length]
        out.append(copy)
    return out


# ====================================================================================
# MODEL TESTS
# ====================================================================================
class TestRoleSelector:
    """Tests for the selector networks."""

    def test_zero_encoder_gives_zero_history(self, rng: np.random.Generator) -> None:
        """Zero parameters and inputs keep the history at zero."""
        selector = RoleSelector(5, 3, 4, rng)
        for p in selector.parameters():
            p.data[...] = 0.0

        h, hidden = encode_history_selector(
            selector, np.zeros((2, 5)), selector.initial_hidden(2)
        )

        assert not h.data.any()
        assert hidden is h

    def test_feedforward_has_no_encoder(self, rng: np.random.Generator) -> None:
        """The feedforward form scores observations and passes the hidden through."""
        selector = RoleSelector(5, 3, 4, rng, kind="feedforward")
        hidden = selector.initial_hidden(2)

        z, out_hidden = selector(np.zeros((2, 5)), np.ones((2, 3)), hidden)

        assert z.shape == (2, 4)
        assert out_hidden is hidden
        with pytest.raises(ValueError, match="no history encoder"):
            encode_history_selector(selector, np.zeros((2, 5)), hidden)

    def test_unknown_kind(self, rng: np.random.Generator) -> None:
        """Only recurrent and feedforward selectors exist."""
        with pytest.raises(ValueError, match="Unknown selector kind"):
            RoleSelector(5, 3, 4, rng, kind="attention")  # type: ignore[arg-type]

    def test_zero_z_gives_zero_values(self, rng: np.random.Generator) -> None:
        """A zero trajectory embedding scores every role 0."""
        reps = rng.standard_normal((3, 4))

        assert not role_q_values(Value(np.zeros((2, 4))), reps).data.any()

    def test_dot_products(self, rng: np.random.Generator) -> None:
        """Role values are inner products with role representations."""
        z = rng.standard_normal((2, 4))
        reps = rng.standard_normal((3, 4))

        values = role_q_values(Value(z), reps).data

        expected = np.array([[z[i] @ reps[j] for j in range(3)] for i in range(2)])
        np.testing.assert_allclose(values, expected, atol=EXACT_TOL, rtol=0)

    def test_conventional_values_pass_through(self) -> None:
        """Without representations the output already holds role values."""
        z = Value(np.arange(6.0).reshape(2, 3))

        assert role_q_values(z, None) is z

    def test_targets_sync(self, rng: np.random.Generator) -> None:
        """sync_targets copies online weights."""
        net = SelectorNet(2, 3, 5, 3, 4, rng)
        net.agent.head.fc2.bias.data += 1.0

        net.sync_targets()

        np.testing.assert_array_equal(
            net.target_agent.head.fc2.bias.data, net.agent.head.fc2.bias.data
        )


class TestSelectRoles:
    """Tests for role selection."""

    def test_greedy(self, rng: np.random.Generator) -> None:
        """Epsilon 0 picks the argmax role."""
        values = np.array([[0.1, 0.9, 0.3], [2.0, -1.0, 2.0]])

        assignment = select_roles(values, 0.0, rng)

        assert assignment.roles.tolist() == [1, 0]

    def test_uniform_exploration(self, rng: np.random.Generator) -> None:
        """Epsilon 1 draws roles uniformly."""
        values = np.tile([5.0, 0.0, 0.0, 0.0], (ROLE_DRAWS, 1))

        roles = select_roles(values, 1.0, rng).roles
        counts = np.bincount(roles, minlength=4)

        sigma = np.sqrt(ROLE_DRAWS * 0.25 * 0.75)
        assert np.all(np.abs(counts - ROLE_DRAWS / 4) < 4 * sigma)

    def test_assignment_window(self) -> None:
        """Roles chosen at t cover [t, t + c)."""
        assignment = RoleAssignment(np.zeros(2, dtype=np.int64), t=5, interval=5)

        active = [assignment.active_at(t) for t in (4, 5, 9, 10)]
        assert active == [False, True, True, False]


# ====================================================================================
# TARGET TESTS
# ====================================================================================
class TestWindowTargets:
    """Tests for c-step targets."""

    def test_hand_example(self) -> None:
        """Rewards (1, 1), gamma 0.9, bootstrap 2 and Q_tot 3 give a loss of 0.64."""
        target = _scalar_window([1.0, 1.0], terminal=False, bootstrap=2.0)

        loss = masked_td_loss(Value([[3.0]]), np.array([[target]]), np.ones((1, 1)))

        assert target == pytest.approx(3.8, abs=1e-12)
        assert loss.item() == pytest.approx(0.64, abs=1e-9)

    def test_terminal_drops_bootstrap(self) -> None:
        """A window containing the terminal step ignores the bootstrap."""
        assert _scalar_window([0.0, 0.0], terminal=True, bootstrap=7.0) == 0.0

    def test_discounted_form(self) -> None:
        """Discounting weights rewards by gamma^t' and the bootstrap by gamma^c."""
        target = _scalar_window(
            [1.0, 1.0], terminal=False, bootstrap=2.0, discounted=True
        )

        assert target == pytest.approx(1.0 + 0.9 + 0.81 * 2.0, abs=1e-12)

    def test_boundaries(self) -> None:
        """Boundaries are multiples of c below the length."""
        assert selection_boundaries(7, 3).tolist() == [0, 3, 6]
        with pytest.raises(ValueError, match="at least 1"):
            selection_boundaries(7, 0)

    def test_mask_follows_filled(self) -> None:
        """Boundaries after the episode end are masked."""
        filled = np.array([[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]])
        zeros = np.zeros_like(filled)
        term = np.array([[False, False, True, False, False, False, False]])

        targets, mask = window_targets(zeros, term, filled, zeros, 2, GAMMA)

        assert mask.tolist() == [[1.0, 1.0, 0.0]]
        assert targets.shape == (1, 3)

    def test_one_step_targets(self, rng: np.random.Generator) -> None:
        """With c = 1 targets equal r + gamma * (1 - done) * bootstrap[t + 1]."""
        rewards = rng.standard_normal((3, 6))
        term = rng.random((3, 6)) < 0.3
        filled = np.ones((3, 6))
        boot = rng.standard_normal((3, 6))

        targets, _ = window_targets(rewards, term, filled, boot, 1, GAMMA)

        expected = rewards[:, :5] + GAMMA * np.where(term[:, :5], 0.0, boot[:, 1:])
        np.testing.assert_allclose(targets, expected, atol=EXACT_TOL, rtol=0)


# ====================================================================================
# LOSS TESTS
# ====================================================================================
class TestSelectorLoss:
    """Tests for the full selector loss."""

    def test_interval_one_matches_one_step_td(
        self,
        effect_agent: RodeAgent,
        effect_episodes: list[Episode],
        rng: np.random.Generator,
    ) -> None:
        """With c = 1 the loss equals an independent one-step TD loss."""
        k = effect_agent.roleset.k
        batch = EpisodeBatch.from_episodes(_roled_episodes(effect_episodes[:3], rng, k))
        net = effect_agent.selector
        for p in net.target_agent.parameters():
            p.data += 0.05 * rng.standard_normal(p.shape)

        loss = selector_loss(
            net,
            batch,
            effect_agent.role_reps,
            1,
            GAMMA,
            action_count=effect_agent.spec.action_count,
        )

        expected = _one_step_loss(net, batch, effect_agent)
        assert loss.item() == pytest.approx(expected, abs=1e-12)

    def test_padding_invariance(
        self,
        effect_agent: RodeAgent,
        effect_episodes: list[Episode],
        rng: np.random.Generator,
    ) -> None:
        """Random padding contents leave the loss unchanged."""
        k = effect_agent.roleset.k
        a = effect_agent.spec.action_count
        episodes = _roled_episodes(effect_episodes[:2], rng, k)
        short = episodes[1]
        episodes[1] = Episode(
            obs=short.obs[:2],
            state=short.state[:2],
            avail=short.avail[:2],
            actions=short.actions[:1],
            roles=short.roles[:1],
            rewards=short.rewards[:1],
            terminated=np.array([True]),
        )
        batch = EpisodeBatch.from_episodes(episodes)

        def loss() -> float:
            return selector_loss(
                effect_agent.selector,
                batch,
                effect_agent.role_reps,
                2,
                GAMMA,
                action_count=a,
            ).item()

        clean = loss()
        _fuzz_padding(batch, rng, k, a)

        assert loss() == pytest.approx(clean, abs=EXACT_TOL)

    def test_gradients(
        self,
        effect_agent: RodeAgent,
        effect_episodes: list[Episode],
        rng: np.random.Generator,
    ) -> None:
        """Selector and mixer gradients match central differences."""
        k = effect_agent.roleset.k
        batch = EpisodeBatch.from_episodes(_roled_episodes(effect_episodes[:2], rng, k))
        net = effect_agent.selector

        error = check_parameter_gradients(
            lambda: selector_loss(
                net,
                batch,
                effect_agent.role_reps,
                2,
                GAMMA,
                action_count=effect_agent.spec.action_count,
            ),
            net.online_parameters(),
            max_coords=3,
            rng=rng,
        )

        assert error < GRAD_TOL

    def test_only_online_parameters_get_gradients(
        self, effect_agent: RodeAgent, effect_episodes: list[Episode]
    ) -> None:
        """Targets and the frozen table stay out of the gradient."""
        batch = EpisodeBatch.from_episodes(effect_episodes[:2])
        net = effect_agent.selector

        selector_loss(
            net,
            batch,
            effect_agent.role_reps,
            2,
            GAMMA,
            action_count=effect_agent.spec.action_count,
        ).backward()

        assert all(not p.grad.any() for p in net.target_agent.parameters())
        assert any(p.grad.any() for p in net.agent.parameters())

