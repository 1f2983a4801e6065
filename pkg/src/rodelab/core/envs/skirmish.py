"""Grid combat between controlled allies and scripted enemies."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from rodelab.core.envs.base import EnvSpec, MultiAgentEnv
from rodelab.core.envs.config import SkirmishConfig

logger = logging.getLogger(__name__)

# Action layout
NOOP = 0
STOP = 1
MOVE_NORTH = 2
MOVE_SOUTH = 3
MOVE_EAST = 4
MOVE_WEST = 5
N_FIXED_ACTIONS = 6
MOVES: dict[int, tuple[int, int]] = {
    MOVE_NORTH: (0, 1),
    MOVE_SOUTH: (0, -1),
    MOVE_EAST: (1, 0),
    MOVE_WEST: (-1, 0),
}

OWN_FEATURES = 3  # hp fraction, x, y
SLOT_BASE_FEATURES = 5  # valid, dx, dy, distance, hp fraction


@dataclass
class Unit:
    """Mutable per-episode unit record."""

    x: int
    y: int
    hp: float
    max_hp: float
    damage: float
    attack_range: float
    unit_type: int

    @property
    def alive(self) -> bool:
        """True while hit points remain."""
        return self.hp > 0

    def distance(self, other: Unit) -> float:
        """Euclidean distance between grid cells."""
        return float(np.hypot(self.x - other.x, self.y - other.y))


def attack_action(enemy: int) -> int:
    """Action index that attacks enemy ``enemy``."""
    return N_FIXED_ACTIONS + enemy


class Skirmish(MultiAgentEnv):
    """Allies start on the west edge, enemies on the east edge.

    Allies act first, in index order; then every living enemy attacks its
    nearest living ally in range (ties to the lower index) or steps toward it
    along the axis with the larger gap. Reward is damage dealt plus kill and
    win bonuses, optionally rescaled so the best achievable return equals
    ``reward_max``. The episode ends when either side is wiped out or at the
    step limit.
    """

    def __init__(
        self, config: SkirmishConfig | None = None, seed: int | None = None
    ) -> None:
        self.config = config or SkirmishConfig()
        cfg = self.config
        self.n_ally_slots = (
            cfg.obs_allies if cfg.obs_allies is not None else cfg.n_allies - 1
        )
        self.n_enemy_slots = (
            cfg.obs_enemies if cfg.obs_enemies is not None else cfg.n_enemies
        )
        self.slot_dim = SLOT_BASE_FEATURES + cfg.n_unit_types
        n_slots = self.n_ally_slots + self.n_enemy_slots
        obs_dim = OWN_FEATURES + n_slots * self.slot_dim
        unit_dim = OWN_FEATURES + cfg.n_unit_types
        spec = EnvSpec(
            n_agents=cfg.n_allies,
            action_count=cfg.action_count,
            obs_dim=obs_dim,
            state_dim=(cfg.n_allies + cfg.n_enemies) * unit_dim,
            episode_limit=cfg.episode_limit,
            obs_truncation=(self.n_ally_slots, self.n_enemy_slots),
        )
        super().__init__(spec, seed)
        self.reward_scale = self._reward_scale()
        self.allies: list[Unit] = []
        self.enemies: list[Unit] = []
        self._reset_dynamics()

    # ------------------ Reward bounds ------------------
    @property
    def max_raw_return(self) -> float:
        """Upper bound on the unscaled episode return."""
        cfg = self.config
        total_hp = sum(g.count * g.hp for g in cfg.enemy_groups)
        kills = cfg.n_enemies * cfg.kill_bonus
        return total_hp * cfg.damage_weight + kills + cfg.win_bonus

    def _reward_scale(self) -> float:
        if self.config.reward_max is None:
            return 1.0
        return self.config.reward_max / self.max_raw_return

    # ------------------ Dynamics ------------------
    def _reset_dynamics(self) -> None:
        cfg = self.config
        ally_cells = self._pick_cells(cfg.n_allies, columns=(0, 1))
        enemy_cells = self._pick_cells(
            cfg.n_enemies, columns=(cfg.width - 2, cfg.width - 1)
        )
        hp, damage, reach = cfg.ally_hp, cfg.ally_damage, cfg.ally_range
        self.allies = [
            Unit(x, y, hp, hp, damage, reach, cfg.ally_type) for x, y in ally_cells
        ]
        self.enemies = []
        cells = iter(enemy_cells)
        for group in cfg.enemy_groups:
            for _ in range(group.count):
                x, y = next(cells)
                unit = Unit(
                    x,
                    y,
                    group.hp,
                    group.hp,
                    group.damage,
                    group.attack_range,
                    group.unit_type,
                )
                self.enemies.append(unit)

    def _pick_cells(
        self, count: int, columns: tuple[int, int]
    ) -> list[tuple[int, int]]:
        candidates = [(x, y) for x in columns for y in range(self.config.height)]
        replace = count > len(candidates)
        chosen = self._rng.choice(len(candidates), size=count, replace=replace)
        return [candidates[i] for i in chosen]

    def _apply_actions(self, actions: NDArray[np.int64]) -> tuple[float, bool, bool]:
        cfg = self.config
        damage_dealt = 0.0
        kills = 0
        for ally, action in zip(self.allies, actions, strict=True):
            if not ally.alive or action in (NOOP, STOP):
                continue
            if action in MOVES:
                dx, dy = MOVES[int(action)]
                ally.x += dx
                ally.y += dy
                continue
            target = self.enemies[int(action) - N_FIXED_ACTIONS]
            if not target.alive:
                continue
            dealt = min(ally.damage, target.hp)
            target.hp -= dealt
            damage_dealt += dealt
            if not target.alive:
                kills += 1

        for enemy in self.enemies:
            if enemy.alive:
                self._enemy_act(enemy)

        won = not any(e.alive for e in self.enemies)
        lost = not any(a.alive for a in self.allies)
        reward = damage_dealt * cfg.damage_weight + kills * cfg.kill_bonus
        if won:
            reward += cfg.win_bonus
        return reward * self.reward_scale, won or lost, won

    def _enemy_act(self, enemy: Unit) -> None:
        living = [a for a in self.allies if a.alive]
        if not living:
            return
        target = min(living, key=lambda a: enemy.distance(a))
        if enemy.distance(target) <= enemy.attack_range:
            target.hp = max(0.0, target.hp - enemy.damage)
            return
        gap_x, gap_y = target.x - enemy.x, target.y - enemy.y
        if abs(gap_x) >= abs(gap_y):
            enemy.x += int(np.sign(gap_x))
        else:
            enemy.y += int(np.sign(gap_y))

    # ------------------ Observation ------------------
    def available_actions(self, agent: int) -> NDArray[np.bool_]:
        """Noop only when dead; stop, in-bounds moves and in-range attacks otherwise."""
        avail = np.zeros(self.spec.action_count, dtype=bool)
        ally = self.allies[agent]
        if not ally.alive:
            avail[NOOP] = True
            return avail
        avail[STOP] = True
        for action, (dx, dy) in MOVES.items():
            x, y = ally.x + dx, ally.y + dy
            avail[action] = 0 <= x < self.config.width and 0 <= y < self.config.height
        for j, enemy in enumerate(self.enemies):
            in_range = ally.distance(enemy) <= ally.attack_range
            avail[attack_action(j)] = enemy.alive and in_range
        return avail

    def _slot(self, me: Unit, other: Unit) -> NDArray[np.float64]:
        sight = self.config.sight_range
        slot = np.zeros(self.slot_dim)
        slot[0] = 1.0
        slot[1] = (other.x - me.x) / sight
        slot[2] = (other.y - me.y) / sight
        slot[3] = me.distance(other) / sight
        slot[4] = other.hp / other.max_hp
        slot[SLOT_BASE_FEATURES + other.unit_type] = 1.0
        return slot

    def _visible_slots(
        self, me: Unit, others: list[Unit], n_slots: int
    ) -> NDArray[np.float64]:
        visible = [
            (me.distance(u), i)
            for i, u in enumerate(others)
            if u is not me and u.alive and me.distance(u) <= self.config.sight_range
        ]
        visible.sort()
        block = np.zeros((n_slots, self.slot_dim))
        for row, (_, i) in enumerate(visible[:n_slots]):
            block[row] = self._slot(me, others[i])
        return block.reshape(-1)

    def observe(self, agent: int) -> NDArray[np.float64]:
        """Own features, then nearest ally and enemy slots, zero-padded."""
        me = self.allies[agent]
        if not me.alive:
            return np.zeros(self.spec.obs_dim)
        cfg = self.config
        own = np.array(
            [
                me.hp / me.max_hp,
                me.x / max(cfg.width - 1, 1),
                me.y / max(cfg.height - 1, 1),
            ]
        )
        return np.concatenate(
            [
                own,
                self._visible_slots(me, self.allies, self.n_ally_slots),
                self._visible_slots(me, self.enemies, self.n_enemy_slots),
            ]
        )

    def get_state(self) -> NDArray[np.float64]:
        """Every unit's hp fraction, position and type one-hot."""
        cfg = self.config
        rows = []
        for unit in (*self.allies, *self.enemies):
            row = np.zeros(OWN_FEATURES + cfg.n_unit_types)
            if unit.alive:
                row[0] = unit.hp / unit.max_hp
                row[1] = unit.x / max(cfg.width - 1, 1)
                row[2] = unit.y / max(cfg.height - 1, 1)
            row[OWN_FEATURES + unit.unit_type] = 1.0
            rows.append(row)
        return np.concatenate(rows)
