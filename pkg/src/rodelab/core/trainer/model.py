"""Two-phase training, evaluation, transfer and ablation drivers."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import ROLE_INTERVAL_SWEEP
from rodelab.core.action_repr.model import (
    ActionRepresentationLearner,
    ActionRepresentationTable,
)
from rodelab.core.envs.base import MultiAgentEnv
from rodelab.core.replay.buffer import EpisodeBuffer
from rodelab.core.roles.clustering import cluster_actions, random_action_spaces
from rodelab.core.roles.model import RoleSet, init_roles
from rodelab.core.roles.transfer import map_new_actions
from rodelab.core.trainer.agent import RodeAgent
from rodelab.core.trainer.config import TrainConfig
from rodelab.core.trainer.learner import HierarchyLearner, check_finite
from rodelab.core.trainer.rollout import (
    EpisodeStats,
    run_hierarchical_episode,
    run_random_episode,
)
from rodelab.core.trainer.schedule import EpsilonSchedule, RunState, SeedStreams
from rodelab.utils.metrics import MetricsWriter

logger = logging.getLogger(__name__)

EnvFactory = Callable[[int | None], MultiAgentEnv]


# ------------------ Results ------------------
@dataclass(frozen=True)
class EvalResult:
    """Greedy evaluation statistics.

    Attributes:
        win_rate: Fraction of episodes won.
        mean_return: Mean undiscounted return.
        role_frequencies: Fraction of selections per role (sums to 1).
        fallbacks: Role fallback events across all episodes.
        episodes: Number of episodes played.

    """

    win_rate: float
    mean_return: float
    role_frequencies: list[float]
    fallbacks: int
    episodes: int


@dataclass
class TrainingResult:
    """Outcome of ``run_training``."""

    agent: RodeAgent
    state: RunState
    repr_learner: ActionRepresentationLearner | None
    evaluations: list[tuple[int, EvalResult]] = field(default_factory=list)


@dataclass(frozen=True)
class TransferResult:
    """Zero-shot evaluation on a new environment next to a random baseline."""

    evaluation: EvalResult
    random_baseline: EvalResult
    action_count: int
    roleset: RoleSet
    table: ActionRepresentationTable | None


# ------------------ Evaluation ------------------
def evaluate(
    agent: RodeAgent,
    env: MultiAgentEnv,
    episodes: int,
    rng: np.random.Generator,
) -> EvalResult:
    """Greedy rollouts with exploration off.

    Raises:
        ValueError: If ``episodes`` is not positive or the environment's
            action count differs from the agent's.

    """
    if episodes < 1:
        msg = f"Evaluation needs at least one episode, got {episodes}"
        raise ValueError(msg)
    if env.spec.action_count != agent.roleset.action_count:
        msg = (
            f"Environment has {env.spec.action_count} actions but the agent was built "
            f"for {agent.roleset.action_count}; use transfer to map new actions"
        )
        raise ValueError(msg)
    returns, wins, fallbacks = [], [], 0
    role_counts = np.zeros(agent.roleset.k, dtype=np.int64)
    for _ in range(episodes):
        _, stats = run_hierarchical_episode(env, agent, 0.0, rng)
        returns.append(stats.episode_return)
        wins.append(stats.won)
        role_counts += stats.role_counts
        fallbacks += stats.fallbacks
    total = max(int(role_counts.sum()), 1)
    return EvalResult(
        win_rate=float(np.mean(wins)),
        mean_return=float(np.mean(returns)),
        role_frequencies=(role_counts / total).tolist(),
        fallbacks=fallbacks,
        episodes=episodes,
    )


def evaluate_random_policy(
    env: MultiAgentEnv,
    episodes: int,
    rng: np.random.Generator,
) -> EvalResult:
    """Uniformly random available actions; the baseline for transfer checks."""
    if episodes < 1:
        msg = f"Evaluation needs at least one episode, got {episodes}"
        raise ValueError(msg)
    stats = [run_random_episode(env, rng)[1] for _ in range(episodes)]
    return EvalResult(
        win_rate=float(np.mean([s.won for s in stats])),
        mean_return=float(np.mean([s.episode_return for s in stats])),
        role_frequencies=[],
        fallbacks=0,
        episodes=episodes,
    )


# ------------------ Role construction ------------------
def build_roles(
    config: TrainConfig,
    table: ActionRepresentationTable | None,
    action_count: int,
    streams: SeedStreams,
) -> RoleSet:
    """Role action spaces after the representation phase, per ablation."""
    ablation = config.ablation
    if ablation.flat:
        return init_roles(1, action_count)
    k = min(config.n_clusters, action_count)
    if ablation.full_action_spaces or table is None:
        return init_roles(k, action_count)
    if ablation.random_action_spaces:
        return random_action_spaces(k, action_count, streams.rng("cluster"))
    return cluster_actions(table, k, seed=streams.int_seed("cluster"))


# ------------------ Training ------------------
class Trainer:
    """Runs the representation phase, builds roles, then trains the hierarchy."""

    def __init__(
        self,
        config: TrainConfig,
        env_factory: EnvFactory,
        metrics: MetricsWriter | None = None,
        on_eval: Callable[[RodeAgent, int], None] | None = None,
    ) -> None:
        self.config = config
        self.env_factory = env_factory
        self.metrics = metrics
        self.on_eval = on_eval
        self.streams = SeedStreams(config.seed)
        self.env = env_factory(self.streams.int_seed("env"))
        spec = self.env.spec
        self.buffer = EpisodeBuffer(spec.episode_limit, config.buffer_capacity)
        self.schedule = EpsilonSchedule(
            config.epsilon_start, config.epsilon_finish, config.epsilon_anneal_steps
        )
        self.state = RunState()
        self.repr_learner: ActionRepresentationLearner | None = None
        self.agent: RodeAgent | None = None
        self.learner: HierarchyLearner | None = None
        self.evaluations: list[tuple[int, EvalResult]] = []
        self._next_log = config.log_interval
        self._next_eval = config.eval_interval
        self._last_losses: dict[str, float | None] = {}

    # ------------------ Metrics ------------------
    def _write(self, event: str, **fields: object) -> None:
        if self.metrics is None:
            return
        self.metrics.write(
            event,
            step=self.state.env_steps,
            episode=self.state.episodes,
            phase=self.state.phase,
            **fields,
        )

    def _record_episode(self, stats: EpisodeStats) -> None:
        state = self.state
        state.env_steps += stats.length
        state.episodes += 1
        state.window_returns.append(stats.episode_return)
        state.window_wins.append(stats.won)
        if len(stats.role_counts) == len(state.role_counts):
            state.role_counts += stats.role_counts
        state.fallbacks += stats.fallbacks

    def _maybe_log(self) -> None:
        state = self.state
        if state.env_steps < self._next_log:
            return
        while self._next_log <= state.env_steps:
            self._next_log += self.config.log_interval
        self._write(
            "train",
            epsilon=state.epsilon,
            repr_loss=self._last_losses.get("repr"),
            selector_loss=self._last_losses.get("selector"),
            policy_loss=self._last_losses.get("policy"),
            mean_return=(
                float(np.mean(state.window_returns)) if state.window_returns else None
            ),
            win_rate=float(np.mean(state.window_wins)) if state.window_wins else None,
            role_frequencies=state.role_frequencies(),
            fallbacks=state.fallbacks,
        )
        state.reset_window(len(state.role_counts))

    # ------------------ Phases ------------------
    def run_representation_phase(self) -> None:
        """Random-policy episodes with one forward-model update each.

        The last episode is cut so the phase ends exactly at ``repr_steps``.
        """
        cfg = self.config
        spec = self.env.spec
        steps = cfg.effective_repr_steps
        if steps == 0:
            return
        self.repr_learner = ActionRepresentationLearner(
            spec.n_agents,
            spec.action_count,
            spec.obs_dim,
            self.streams.rng("repr_init"),
            repr_dim=cfg.repr_dim,
            lambda_e=cfg.lambda_e,
            batch_size=cfg.batch_size,
            lr=cfg.lr,
            grad_clip=cfg.grad_clip,
            other_actions="count" if cfg.transferable_inputs else "concat",
        )
        logger.info("Representation phase: %d random steps", steps)
        self.state.phase = "representation"
        self.state.epsilon = 1.0
        explore, replay = self.streams.rng("explore"), self.streams.rng("replay")
        while self.state.env_steps < steps:
            remaining = steps - self.state.env_steps
            episode, stats = run_random_episode(self.env, explore, remaining)
            self.buffer.push(episode)
            self._record_episode(stats)
            loss = self.repr_learner.train_step(self.buffer, replay)
            if loss is not None:
                check_finite("representation", loss, self.state.env_steps)
                self._last_losses["repr"] = loss
            self._maybe_log()

    def build_hierarchy(self) -> RodeAgent:
        """Freeze representations, form roles and create the networks."""
        spec = self.env.spec
        table = self.repr_learner.freeze() if self.repr_learner is not None else None
        roleset = build_roles(self.config, table, spec.action_count, self.streams)
        self.agent = RodeAgent.build(
            spec, self.config, table, roleset, self.streams.rng("agent_init")
        )
        self.learner = HierarchyLearner(self.agent)
        state = self.state
        state.phase = "hierarchy"
        state.hierarchy_start = state.env_steps
        state.reset_window(roleset.k)
        self._last_losses = {}
        logger.info(
            "Hierarchy phase from step %d with %d roles (variant %s)",
            state.env_steps,
            roleset.k,
            self.config.ablation.variant,
        )
        self._write("phase", n_roles=roleset.k, roles=roleset.to_lists())
        return self.agent

    def run_hierarchy_phase(self) -> None:
        """Hierarchical rollouts with one update pair per episode."""
        if self.agent is None or self.learner is None:
            msg = "build_hierarchy() must run before the hierarchy phase"
            raise RuntimeError(msg)
        cfg, state = self.config, self.state
        explore, replay = self.streams.rng("explore"), self.streams.rng("replay")
        start = state.hierarchy_start or 0
        while state.env_steps < cfg.total_steps:
            state.epsilon = self.schedule.value(state.env_steps - start)
            episode, stats = run_hierarchical_episode(
                self.env, self.agent, state.epsilon, explore
            )
            self.buffer.push(episode)
            self._record_episode(stats)
            result = self.learner.update(self.buffer, replay, state.env_steps)
            state.updates = self.learner.updates
            if result.policy_loss is not None:
                self._last_losses = {
                    "selector": result.selector_loss,
                    "policy": result.policy_loss,
                }
            self._maybe_log()
            if state.env_steps >= self._next_eval:
                while self._next_eval <= state.env_steps:
                    self._next_eval += cfg.eval_interval
                self.run_evaluation()
        if not self.evaluations or self.evaluations[-1][0] != state.env_steps:
            self.run_evaluation()

    def run_evaluation(self) -> EvalResult:
        """Evaluate greedily on a freshly seeded evaluation environment."""
        if self.agent is None:
            msg = "No agent to evaluate before the hierarchy phase"
            raise RuntimeError(msg)
        env = self.env_factory(self.streams.int_seed("eval_env"))
        rng = np.random.default_rng(self.streams.int_seed("eval_explore"))
        result = evaluate(self.agent, env, self.config.eval_episodes, rng)
        self.evaluations.append((self.state.env_steps, result))
        logger.info(
            "Eval at step %d: win rate %.3f, mean return %.3f",
            self.state.env_steps,
            result.win_rate,
            result.mean_return,
        )
        self._write(
            "eval",
            win_rate=result.win_rate,
            mean_return=result.mean_return,
            role_frequencies=result.role_frequencies,
            fallbacks=result.fallbacks,
            episodes=result.episodes,
        )
        if self.on_eval is not None:
            self.on_eval(self.agent, self.state.env_steps)
        return result

    def run(self) -> TrainingResult:
        """Both phases end to end."""
        self.run_representation_phase()
        self.build_hierarchy()
        self.run_hierarchy_phase()
        assert self.agent is not None  # noqa: S101
        return TrainingResult(
            self.agent, self.state, self.repr_learner, self.evaluations
        )


def run_training(
    config: TrainConfig,
    env_factory: EnvFactory,
    metrics: MetricsWriter | None = None,
    on_eval: Callable[[RodeAgent, int], None] | None = None,
) -> TrainingResult:
    """Train with ``config`` on environments from ``env_factory``."""
    return Trainer(config, env_factory, metrics, on_eval).run()


def run_ablation(
    config: TrainConfig,
    variant: str,
    env_factory: EnvFactory,
    metrics: MetricsWriter | None = None,
) -> TrainingResult:
    """Train ablation ``variant`` (A, B, C or D)."""
    return run_training(config.with_ablation(variant), env_factory, metrics)


def run_interval_sweep(
    config: TrainConfig,
    env_factory: EnvFactory,
    intervals: tuple[int, ...] = ROLE_INTERVAL_SWEEP,
    metrics_factory: Callable[[int], MetricsWriter | None] | None = None,
) -> dict[int, TrainingResult]:
    """Train once per role interval."""
    results = {}
    for c in intervals:
        metrics = metrics_factory(c) if metrics_factory is not None else None
        try:
            results[c] = run_training(
                replace(config, role_interval=c), env_factory, metrics
            )
        finally:
            if metrics is not None:
                metrics.close()
    return results


# ------------------ Transfer ------------------
def learn_representations(
    env: MultiAgentEnv,
    config: TrainConfig,
    steps: int,
    seed: int,
) -> ActionRepresentationTable:
    """Random-policy forward-model training on ``env``, then freeze."""
    streams = SeedStreams(seed)
    spec = env.spec
    learner = ActionRepresentationLearner(
        spec.n_agents,
        spec.action_count,
        spec.obs_dim,
        streams.rng("repr_init"),
        repr_dim=config.repr_dim,
        lambda_e=config.lambda_e,
        batch_size=config.batch_size,
        lr=config.lr,
        grad_clip=config.grad_clip,
        other_actions="count" if config.transferable_inputs else "concat",
    )
    buffer = EpisodeBuffer(spec.episode_limit, config.buffer_capacity)
    explore, replay = streams.rng("explore"), streams.rng("replay")
    taken = 0
    while taken < steps:
        episode, stats = run_random_episode(env, explore, steps - taken)
        buffer.push(episode)
        taken += stats.length
        loss = learner.train_step(buffer, replay)
        if loss is not None:
            check_finite("representation", loss, taken)
    return learner.freeze()


def run_transfer(
    agent: RodeAgent,
    env_factory: EnvFactory,
    episodes: int,
    seed: int = 0,
    repr_steps: int | None = None,
    metrics: MetricsWriter | None = None,
) -> TransferResult:
    """Evaluate trained policies zero-shot on a related environment.

    When the action or agent count differs, a fresh forward model is trained
    on the new environment; new actions take the mean old representation of
    the old actions they cluster with and join those actions' roles. Selector
    and policy weights are never updated.

    Raises:
        ValueError: If the task changed and the agent was not trained with
            transferable inputs or uses conventional heads.
        UnmappedActionError: If a new action has no similar old action.

    """
    cfg = agent.config
    streams = SeedStreams(seed)
    env = env_factory(streams.int_seed("env"))
    if env.spec.obs_dim != agent.spec.obs_dim:
        msg = (
            f"Observation size changed from {agent.spec.obs_dim} "
            f"to {env.spec.obs_dim}"
        )
        raise ValueError(msg)

    same_task = (
        env.spec.action_count == agent.spec.action_count
        and env.spec.n_agents == agent.spec.n_agents
    )
    if same_task:
        table, roleset = agent.table, agent.roleset
    else:
        if not cfg.transferable_inputs:
            msg = "Transfer needs an agent trained with transferable_inputs"
            raise ValueError(msg)
        if agent.conventional or agent.table is None:
            msg = (
                "Conventional heads cannot act on new actions; "
                "transfer needs representations"
            )
            raise ValueError(msg)
        steps = cfg.repr_steps if repr_steps is None else repr_steps
        new_table = learn_representations(
            env, cfg, steps, streams.int_seed("repr_init")
        )
        table, roleset = map_new_actions(
            agent.table,
            agent.roleset,
            new_table,
            cfg.n_clusters,
            seed=streams.int_seed("cluster"),
        )
    transferred = agent.with_environment(env.spec, table, roleset)

    eval_seed = streams.int_seed("eval_env")
    result = evaluate(
        transferred,
        env_factory(eval_seed),
        episodes,
        np.random.default_rng(streams.int_seed("eval_explore")),
    )
    baseline = evaluate_random_policy(
        env_factory(eval_seed),
        episodes,
        np.random.default_rng(streams.int_seed("eval_explore")),
    )
    logger.info(
        "Transfer to %d actions: win rate %.3f (random %.3f)",
        env.spec.action_count,
        result.win_rate,
        baseline.win_rate,
    )
    if metrics is not None:
        metrics.write(
            "transfer",
            step=metrics.last_step,
            episode=episodes,
            phase="transfer",
            win_rate=result.win_rate,
            mean_return=result.mean_return,
            role_frequencies=result.role_frequencies,
            random_win_rate=baseline.win_rate,
            random_mean_return=baseline.mean_return,
            action_count=env.spec.action_count,
        )
    return TransferResult(result, baseline, env.spec.action_count, roleset, table)


def evaluation_seed_rng(seed: int) -> tuple[int, np.random.Generator]:
    """Evaluation environment seed and exploration stream for a run seed."""
    streams = SeedStreams(seed)
    explore = np.random.default_rng(streams.int_seed("eval_explore"))
    return streams.int_seed("eval_env"), explore


def role_frequency_array(result: EvalResult) -> NDArray[np.float64]:
    """Role frequencies as an array."""
    return np.asarray(result.role_frequencies, dtype=np.float64)
