"""Epsilon-greedy choice over masked values."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


def epsilon_greedy(
    values: NDArray[np.float64],
    allowed: NDArray[np.bool_],
    epsilon: float,
    rng: np.random.Generator,
) -> NDArray[np.int64]:
    """Pick one index per row.

    With probability ``1 - epsilon`` the row's argmax among allowed entries
    (ties to the lowest index); otherwise uniform over allowed entries.

    Args:
        values: ``(rows, choices)`` scores.
        allowed: Same-shape mask; every row needs at least one True.
        epsilon: Exploration probability in ``[0, 1]``.
        rng: Random stream.

    Returns:
        ``(rows,)`` chosen indices.

    """
    if not 0.0 <= epsilon <= 1.0:
        msg = f"epsilon must lie in [0, 1], got {epsilon}"
        raise ValueError(msg)
    values = np.atleast_2d(values)
    allowed = np.atleast_2d(allowed).astype(bool)
    if not allowed.any(axis=1).all():
        msg = "Every row needs at least one allowed choice"
        raise ValueError(msg)
    masked = np.where(allowed, values, -np.inf)
    greedy = np.argmax(masked, axis=1)
    explore = rng.random(len(values)) < epsilon
    chosen = greedy.astype(np.int64)
    for row in np.flatnonzero(explore):
        chosen[row] = rng.choice(np.flatnonzero(allowed[row]))
    return chosen
