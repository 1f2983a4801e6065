"""Extend learned roles to actions that did not exist during training."""

from __future__ import annotations

import logging

import numpy as np

from rodelab.core.action_repr.model import ActionRepresentationTable
from rodelab.core.roles.clustering import kmeans_labels
from rodelab.core.roles.model import RoleSet, UnmappedActionError

logger = logging.getLogger(__name__)


def map_new_actions(
    old_table: ActionRepresentationTable,
    old_roleset: RoleSet,
    new_table: ActionRepresentationTable,
    k: int,
    seed: int | None = 0,
) -> tuple[ActionRepresentationTable, RoleSet]:
    """Give each new action the mean old representation of its cluster-mates.

    ``new_table`` comes from an encoder trained on the new task; its first
    ``A_old`` rows are the old actions. New actions are clustered together
    with the old ones; a new action takes the mean OLD representation of the
    old actions in its cluster and joins every role containing any of them.
    The number of roles never changes.

    Raises:
        UnmappedActionError: If a new action's cluster has no old action.
        ValueError: If the new task has fewer actions than the old one.

    """
    a_old, a_new = old_table.action_count, new_table.action_count
    if a_new < a_old:
        msg = f"New task has {a_new} actions, fewer than the trained {a_old}"
        raise ValueError(msg)
    if old_roleset.action_count != a_old:
        msg = "Role set and table disagree on the old action count"
        raise ValueError(msg)
    if a_new == a_old:
        return old_table, old_roleset

    labels = kmeans_labels(new_table.vectors, min(k, a_new), seed)
    vectors = np.zeros((a_new, old_table.dim))
    vectors[:a_old] = old_table.vectors
    masks = np.zeros((old_roleset.k, a_new), dtype=bool)
    masks[:, :a_old] = old_roleset.masks
    for action in range(a_old, a_new):
        similar = np.flatnonzero(labels[:a_old] == labels[action])
        if len(similar) == 0:
            msg = f"New action {action} shares no cluster with any trained action"
            raise UnmappedActionError(msg)
        vectors[action] = old_table.vectors[similar].mean(axis=0)
        masks[:, action] = old_roleset.masks[:, similar].any(axis=1)
        logger.debug(
            "Mapped new action %d onto old actions %s", action, similar.tolist()
        )
    return ActionRepresentationTable(vectors), RoleSet(masks)
