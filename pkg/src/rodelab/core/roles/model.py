"""Role action spaces and role representations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from rodelab.core.action_repr.model import ActionRepresentationTable


class UnmappedActionError(ValueError):
    """A new action shares no cluster with any old action."""


@dataclass(frozen=True)
class RoleSet:
    """Restricted action spaces, one boolean mask row per role.

    Masks may overlap but their union must cover every action.

    Attributes:
        masks: ``(K, A)`` read-only membership matrix.

    """

    masks: NDArray[np.bool_]

    def __post_init__(self) -> None:
        """Lock the masks and check coverage."""
        masks = np.array(self.masks, dtype=bool, copy=True)
        if masks.ndim != 2 or masks.shape[0] < 1:  # noqa: PLR2004
            msg = f"Role masks must be (K >= 1, A), got shape {masks.shape}"
            raise ValueError(msg)
        if not masks.any(axis=1).all():
            msg = "Every role needs at least one action"
            raise ValueError(msg)
        if not masks.any(axis=0).all():
            missing = np.flatnonzero(~masks.any(axis=0)).tolist()
            msg = f"Role action spaces do not cover actions {missing}"
            raise ValueError(msg)
        masks.setflags(write=False)
        object.__setattr__(self, "masks", masks)

    @property
    def k(self) -> int:
        """Number of roles."""
        return int(self.masks.shape[0])

    @property
    def action_count(self) -> int:
        """Size of the full action space."""
        return int(self.masks.shape[1])

    @property
    def action_sets(self) -> list[NDArray[np.int64]]:
        """Sorted action indices of every role."""
        return [np.flatnonzero(row) for row in self.masks]

    @property
    def sizes(self) -> NDArray[np.int64]:
        """Number of actions per role."""
        return self.masks.sum(axis=1)

    def representations(self, table: ActionRepresentationTable) -> NDArray[np.float64]:
        """Mean member representation of every role, ``(K, d)``."""
        if table.action_count != self.action_count:
            msg = (
                f"Table has {table.action_count} actions, "
                f"roles cover {self.action_count}"
            )
            raise ValueError(msg)
        weights = self.masks / self.sizes[:, None]
        return weights @ table.vectors

    def to_lists(self) -> list[list[int]]:
        """Plain nested lists for reports."""
        return [s.tolist() for s in self.action_sets]


def init_roles(k: int, action_count: int) -> RoleSet:
    """``k`` roles that all use the full action space."""
    if k < 1:
        msg = f"Need at least one role, got {k}"
        raise ValueError(msg)
    return RoleSet(np.ones((k, action_count), dtype=bool))


def role_representation(
    roleset: RoleSet,
    table: ActionRepresentationTable,
    j: int,
) -> NDArray[np.float64]:
    """Mean representation of role ``j``'s actions."""
    if not 0 <= j < roleset.k:
        msg = f"Role {j} outside [0, {roleset.k})"
        raise IndexError(msg)
    return table.vectors[roleset.masks[j]].mean(axis=0)
