"""Environment configuration records and scenario presets."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from rodelab.config.records import ConfigError, build, check_keys

# ------------------ Matrix Game ------------------
DEFAULT_MATRIX_PAYOFF: tuple[tuple[tuple[int, ...], float], ...] = (
    ((0, 0), 8.0),
    ((0, 1), -12.0),
    ((1, 0), -12.0),
    ((1, 1), 6.0),
)


@dataclass(frozen=True)
class MatrixGameConfig:
    """One-step cooperative matrix game.

    Attributes:
        n_agents: Number of players.
        n_actions: Actions per player.
        payoff: ``(joint action, reward)`` entries; missing entries pay 0.
        obs_dim: Length of the constant zero observation and state.

    """

    n_agents: int = 2
    n_actions: int = 3
    payoff: tuple[tuple[tuple[int, ...], float], ...] = DEFAULT_MATRIX_PAYOFF
    obs_dim: int = 2

    def __post_init__(self) -> None:
        """Normalise the payoff table and check joint-action arity."""
        table = tuple((tuple(int(a) for a in k), float(v)) for k, v in self.payoff)
        object.__setattr__(self, "payoff", table)
        for joint, _ in table:
            fits = all(0 <= a < self.n_actions for a in joint)
            if len(joint) != self.n_agents or not fits:
                msg = (
                    f"Payoff entry {joint} does not fit {self.n_agents} agents "
                    f"x {self.n_actions} actions"
                )
                raise ValueError(msg)

    def payoff_array(self) -> np.ndarray:
        """Dense payoff tensor of shape ``(n_actions,) * n_agents``."""
        table = np.zeros((self.n_actions,) * self.n_agents)
        for joint, reward in self.payoff:
            table[joint] = reward
        return table

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MatrixGameConfig:
        """Build from a mapping with ``payoff`` as ``[{actions, reward}]``."""
        data = dict(data)
        if "payoff" in data:
            try:
                data["payoff"] = tuple(
                    (tuple(entry["actions"]), entry["reward"])
                    for entry in data["payoff"]
                )
            except (KeyError, TypeError) as e:
                msg = "env.payoff must be a list of {actions, reward} entries"
                raise ConfigError(msg) from e
        return build(cls, data, "env")

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form suitable for YAML."""
        return {
            "n_agents": self.n_agents,
            "n_actions": self.n_actions,
            "payoff": [{"actions": list(k), "reward": v} for k, v in self.payoff],
            "obs_dim": self.obs_dim,
        }


# ------------------ Effect Game ------------------
@dataclass(frozen=True)
class EffectGameConfig:
    """Synthetic game whose actions fall into known effect groups.

    Attributes:
        n_agents: Number of agents.
        n_groups: Ground-truth effect groups G.
        actions_per_group: Actions sharing each group's effect.
        obs_dim: Observation length; defaults deltas to unit vectors.
        deltas: Per-group observation shift; None means identity rows.
        reward_weights: Per-group reward; None means evenly spaced in [0, 1].
        noise_scale: Noise sigma as a fraction of ``||delta_g||``.
        horizon: Episode length.

    """

    n_agents: int = 2
    n_groups: int = 3
    actions_per_group: int = 4
    obs_dim: int = 4
    deltas: tuple[tuple[float, ...], ...] | None = None
    reward_weights: tuple[float, ...] | None = None
    noise_scale: float = 0.05
    horizon: int = 10

    def __post_init__(self) -> None:
        """Fill derived defaults and validate shapes."""
        if self.n_groups < 1 or self.actions_per_group < 1:
            msg = "Effect game needs at least one group and one action per group"
            raise ValueError(msg)
        if self.deltas is None:
            if self.obs_dim < self.n_groups:
                msg = (
                    f"obs_dim {self.obs_dim} too small for {self.n_groups} unit deltas"
                )
                raise ValueError(msg)
            deltas = np.eye(self.n_groups, self.obs_dim)
        else:
            deltas = np.asarray(self.deltas, dtype=np.float64)
        if deltas.shape != (self.n_groups, self.obs_dim):
            msg = f"deltas must be {self.n_groups}x{self.obs_dim}, got {deltas.shape}"
            raise ValueError(msg)
        weights = (
            np.linspace(0.0, 1.0, self.n_groups)
            if self.reward_weights is None
            else np.asarray(self.reward_weights, dtype=np.float64)
        )
        if weights.shape != (self.n_groups,):
            msg = f"reward_weights must have {self.n_groups} entries"
            raise ValueError(msg)
        if self.noise_scale < 0:
            msg = f"noise_scale must be non-negative, got {self.noise_scale}"
            raise ValueError(msg)
        rows = tuple(tuple(float(v) for v in r) for r in deltas)
        object.__setattr__(self, "deltas", rows)
        object.__setattr__(self, "reward_weights", tuple(float(w) for w in weights))

    @property
    def action_count(self) -> int:
        """Total actions per agent."""
        return self.n_groups * self.actions_per_group

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> EffectGameConfig:
        """Build from a parsed mapping."""
        data = dict(data)
        if data.get("deltas") is not None:
            data["deltas"] = tuple(tuple(row) for row in data["deltas"])
        if data.get("reward_weights") is not None:
            data["reward_weights"] = tuple(data["reward_weights"])
        return build(cls, data, "env")

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form suitable for YAML."""
        out = asdict(self)
        out["deltas"] = [list(r) for r in self.deltas or ()]
        out["reward_weights"] = list(self.reward_weights or ())
        return out


# ------------------ Skirmish ------------------
@dataclass(frozen=True)
class EnemyGroup:
    """A block of identical enemy units."""

    count: int
    unit_type: int = 1
    hp: float = 10.0
    damage: float = 2.0
    attack_range: float = 2.0

    def __post_init__(self) -> None:
        """Validate unit stats."""
        if self.count < 1 or self.hp <= 0 or self.damage < 0 or self.attack_range <= 0:
            msg = f"Invalid enemy group {self}"
            raise ValueError(msg)


@dataclass(frozen=True)
class SkirmishConfig:
    """Grid combat scenario.

    Each ally has ``6 + n_enemies`` actions: noop, stop, four moves and one
    attack per enemy.

    Attributes:
        width: Grid columns.
        height: Grid rows.
        n_allies: Controlled units.
        ally_hp: Ally hit points.
        ally_damage: Damage per ally attack.
        ally_range: Ally attack range (Euclidean).
        ally_type: Unit-type id of allies.
        enemy_groups: Enemy blocks in index order.
        sight_range: Observation radius.
        obs_allies: Nearest allies in each observation (N_a); None keeps all.
        obs_enemies: Nearest enemies in each observation (N_e); None keeps all.
        damage_weight: Reward per point of damage dealt.
        kill_bonus: Reward per enemy killed.
        win_bonus: Reward for killing every enemy.
        reward_max: Rescale rewards so the best return equals this; None disables.
        n_unit_types: Length of the unit-type one-hot.
        episode_limit: Maximum steps.

    """

    width: int = 8
    height: int = 8
    n_allies: int = 3
    ally_hp: float = 10.0
    ally_damage: float = 3.0
    ally_range: float = 2.0
    ally_type: int = 0
    enemy_groups: tuple[EnemyGroup, ...] = field(
        default_factory=lambda: (EnemyGroup(count=3),)
    )
    sight_range: float = 5.0
    obs_allies: int | None = None
    obs_enemies: int | None = None
    damage_weight: float = 1.0
    kill_bonus: float = 10.0
    win_bonus: float = 200.0
    reward_max: float | None = 20.0
    n_unit_types: int = 3
    episode_limit: int = 60

    def __post_init__(self) -> None:
        """Coerce nested groups and validate sizes."""
        groups = tuple(
            g if isinstance(g, EnemyGroup) else EnemyGroup(**g)
            for g in self.enemy_groups
        )
        object.__setattr__(self, "enemy_groups", groups)
        if not groups:
            msg = "Skirmish needs at least one enemy group"
            raise ValueError(msg)
        if self.width < 2 or self.height < 1 or self.n_allies < 1:  # noqa: PLR2004
            msg = (
                f"Grid {self.width}x{self.height} with {self.n_allies} allies "
                "is too small"
            )
            raise ValueError(msg)
        types = [self.ally_type, *(g.unit_type for g in groups)]
        if max(types) >= self.n_unit_types or min(types) < 0:
            msg = f"Unit types {types} exceed n_unit_types={self.n_unit_types}"
            raise ValueError(msg)
        if self.episode_limit < 1:
            msg = f"episode_limit must be positive, got {self.episode_limit}"
            raise ValueError(msg)

    @property
    def n_enemies(self) -> int:
        """Total enemy units."""
        return sum(g.count for g in self.enemy_groups)

    @property
    def action_count(self) -> int:
        """noop, stop, four moves, one attack per enemy."""
        return 6 + self.n_enemies

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SkirmishConfig:
        """Build from a parsed mapping."""
        data = dict(data)
        if "enemy_groups" in data:
            groups = []
            for i, g in enumerate(data["enemy_groups"]):
                check_keys(EnemyGroup, g, f"env.enemy_groups[{i}]")
                groups.append(build(EnemyGroup, g, f"env.enemy_groups[{i}]"))
            data["enemy_groups"] = tuple(groups)
        return build(cls, data, "env")

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form suitable for YAML."""
        out = asdict(self)
        out["enemy_groups"] = [asdict(g) for g in self.enemy_groups]
        return out


# ------------------ Presets ------------------
SKIRMISH_PRESETS: dict[str, SkirmishConfig] = {
    # One enemy type: expect two clusters (moves, attacks).
    "skirmish_easy": SkirmishConfig(
        enemy_groups=(EnemyGroup(count=3, unit_type=1, hp=10.0, damage=2.0),),
    ),
    # Heterogeneous enemies, allies outnumbered: expect five clusters.
    "skirmish_hard": SkirmishConfig(
        n_allies=3,
        enemy_groups=(
            EnemyGroup(count=2, unit_type=1, hp=8.0, damage=2.0, attack_range=2.0),
            EnemyGroup(count=2, unit_type=2, hp=14.0, damage=3.0, attack_range=1.0),
        ),
    ),
    "skirmish_transfer_source": SkirmishConfig(
        enemy_groups=(EnemyGroup(count=3, unit_type=1, hp=8.0, damage=1.5),),
        obs_allies=2,
        obs_enemies=3,
    ),
    "skirmish_transfer_target": SkirmishConfig(
        enemy_groups=(EnemyGroup(count=5, unit_type=1, hp=8.0, damage=1.5),),
        obs_allies=2,
        obs_enemies=3,
    ),
}
