"""Masked temporal-difference loss."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rodelab.core.numerics.tensor import (
    ShapeError,
    Value,
    mul,
    reduce_sum,
    squared_error,
)


def masked_td_loss(
    q_taken: Value,
    targets: NDArray[np.float64],
    mask: NDArray[np.float64],
) -> Value:
    """Mean squared TD error over entries where ``mask`` is 1.

    Padded entries contribute exactly zero, so their contents never affect
    the loss.
    """
    mask = np.asarray(mask, dtype=np.float64)
    if q_taken.shape != mask.shape or np.shape(targets) != mask.shape:
        msg = (
            f"TD loss shapes differ: q {q_taken.shape}, targets {np.shape(targets)}, "
            f"mask {mask.shape}"
        )
        raise ShapeError(msg)
    clean_targets = np.where(mask > 0, targets, 0.0)
    errors = squared_error(q_taken, clean_targets)
    total = reduce_sum(mul(errors, mask))
    return mul(total, 1.0 / max(float(mask.sum()), 1.0))
