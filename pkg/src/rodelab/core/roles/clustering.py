"""k-means factorisation of the action space."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import pdist, squareform
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import adjusted_rand_score

from rodelab.config.constants import KMEANS_MAX_ITER, KMEANS_RESTARTS
from rodelab.config.defaults import DEFAULT_RANDOM_SPACE_RETRIES
from rodelab.core.action_repr.model import ActionRepresentationTable
from rodelab.core.roles.model import RoleSet

logger = logging.getLogger(__name__)


def kmeans_labels(
    vectors: NDArray[np.float64], k: int, seed: int | None = 0
) -> NDArray[np.int64]:
    """k-means++ with restarts; labels renumbered by each cluster's lowest member.

    Raises:
        ValueError: If ``k`` is below 1 or above the number of points.

    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = len(vectors)
    if not 1 <= k <= n:
        msg = f"k={k} must lie in [1, {n}] for {n} actions"
        raise ValueError(msg)
    with warnings.catch_warnings():
        # Duplicate points legitimately yield fewer distinct clusters than k.
        warnings.simplefilter("ignore", ConvergenceWarning)
        model = KMeans(
            n_clusters=k,
            init="k-means++",
            n_init=KMEANS_RESTARTS,
            max_iter=KMEANS_MAX_ITER,
            random_state=seed,
        )
        raw = model.fit_predict(vectors)
    return canonical_labels(raw)


def canonical_labels(labels: NDArray[np.int64]) -> NDArray[np.int64]:
    """Renumber clusters in order of first appearance."""
    labels = np.asarray(labels)
    _, first = np.unique(labels, return_index=True)
    order = labels[np.sort(first)]
    mapping = {old: new for new, old in enumerate(order)}
    return np.array([mapping[v] for v in labels], dtype=np.int64)


def roles_from_labels(labels: NDArray[np.int64]) -> RoleSet:
    """Apply the outlier rule to a partition and build the role set.

    Members of singleton clusters join every other cluster and their own
    cluster is dissolved. When no multi-member cluster remains, one role
    holds every action.
    """
    labels = np.asarray(labels, dtype=np.int64)
    action_count = len(labels)
    clusters = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    singletons = [c for c in clusters if len(c) == 1]
    outliers = np.concatenate(singletons or [np.zeros(0, dtype=np.int64)])
    kept = [c for c in clusters if len(c) > 1]
    if not kept:
        return RoleSet(np.ones((1, action_count), dtype=bool))
    masks = np.zeros((len(kept), action_count), dtype=bool)
    for j, members in enumerate(kept):
        masks[j, members] = True
        masks[j, outliers] = True
    if len(outliers):
        logger.debug(
            "Outlier actions %s added to all %d roles", outliers.tolist(), len(kept)
        )
    return RoleSet(masks)


def cluster_actions(
    table: ActionRepresentationTable, k: int, seed: int | None = 0
) -> RoleSet:
    """Cluster frozen representations into role action spaces."""
    if k > table.action_count:
        msg = f"Cannot form {k} clusters from {table.action_count} actions"
        raise ValueError(msg)
    labels = kmeans_labels(table.vectors, k, seed)
    roleset = roles_from_labels(labels)
    logger.info(
        "Clustered %d actions into %d roles: %s",
        table.action_count,
        roleset.k,
        roleset.to_lists(),
    )
    return roleset


def within_cluster_sse(
    vectors: NDArray[np.float64], labels: NDArray[np.int64]
) -> float:
    """Sum of squared distances to cluster means."""
    vectors = np.asarray(vectors, dtype=np.float64)
    total = 0.0
    for c in np.unique(labels):
        members = vectors[labels == c]
        total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


def random_action_spaces(
    k: int,
    action_count: int,
    rng: np.random.Generator,
    sizes: NDArray[np.int64] | None = None,
    max_retries: int = DEFAULT_RANDOM_SPACE_RETRIES,
) -> RoleSet:
    """Random role action spaces whose union covers every action.

    Each role draws a subset of ``sizes[j]`` actions (default: uniform size in
    ``[2, A]``). Draws repeat until the union covers the action space.

    Raises:
        RuntimeError: If coverage fails ``max_retries`` times.

    """
    min_size = min(2, action_count)
    for _ in range(max_retries):
        if sizes is None:
            draw = rng.integers(min_size, action_count + 1, size=k)
        else:
            draw = sizes
        masks = np.zeros((k, action_count), dtype=bool)
        for j in range(k):
            masks[j, rng.choice(action_count, size=int(draw[j]), replace=False)] = True
        if masks.any(axis=0).all():
            return RoleSet(masks)
    msg = (
        f"No covering random action spaces for k={k}, A={action_count} "
        f"after {max_retries} tries"
    )
    raise RuntimeError(msg)


@dataclass(frozen=True)
class ClusterReport:
    """Inspection data for a clustering of action representations."""

    labels: list[int]
    roles: list[list[int]]
    role_sizes: list[int]
    sse: float
    distances: list[list[float]]
    adjusted_rand_index: float | None

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for YAML or JSON output."""
        return {
            "labels": self.labels,
            "roles": self.roles,
            "role_sizes": self.role_sizes,
            "sse": self.sse,
            "distances": self.distances,
            "adjusted_rand_index": self.adjusted_rand_index,
        }


def cluster_report(
    table: ActionRepresentationTable,
    k: int,
    seed: int | None = 0,
    ground_truth: NDArray[np.int64] | None = None,
    roleset: RoleSet | None = None,
) -> ClusterReport:
    """Summarise a clustering of ``table``.

    The report holds the partition, role sizes, within-cluster SSE, pairwise
    distances and, when ``ground_truth`` is given, the adjusted Rand index.
    """
    labels = kmeans_labels(table.vectors, k, seed)
    roles = roleset if roleset is not None else roles_from_labels(labels)
    ari = None
    if ground_truth is not None:
        ari = float(adjusted_rand_score(ground_truth, labels))
    return ClusterReport(
        labels=labels.tolist(),
        roles=roles.to_lists(),
        role_sizes=roles.sizes.tolist(),
        sse=within_cluster_sse(table.vectors, labels),
        distances=squareform(pdist(table.vectors)).tolist(),
        adjusted_rand_index=ari,
    )
