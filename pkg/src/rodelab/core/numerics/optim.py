"""RMSProp optimiser and global-norm gradient clipping."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from rodelab.config.constants import LEARNING_RATE, RMSPROP_ALPHA
from rodelab.config.defaults import DEFAULT_RMSPROP_EPS
from rodelab.core.numerics.tensor import Parameter

logger = logging.getLogger(__name__)


@dataclass
class RmspropState:
    """Moving averages of squared gradients for a parameter list.

    Attributes:
        lr: Learning rate.
        alpha: Decay of the squared-gradient average.
        eps: Stability constant added to the root of the average.
        square_avg: One non-negative buffer per parameter, created lazily.
        steps: Number of updates applied.

    """

    lr: float = LEARNING_RATE
    alpha: float = RMSPROP_ALPHA
    eps: float = DEFAULT_RMSPROP_EPS
    square_avg: list[NDArray[np.float64]] = field(default_factory=list)
    steps: int = 0

    def __post_init__(self) -> None:
        """Validate hyperparameters."""
        if self.lr <= 0:
            msg = f"Learning rate must be positive, got {self.lr}"
            raise ValueError(msg)
        if not 0.0 <= self.alpha < 1.0:
            msg = f"alpha must lie in [0, 1), got {self.alpha}"
            raise ValueError(msg)
        if self.eps <= 0:
            msg = f"eps must be positive, got {self.eps}"
            raise ValueError(msg)


def rmsprop_step(params: Sequence[Parameter], state: RmspropState) -> None:
    """Apply one RMSProp update and zero the gradients.

    ``E <- alpha*E + (1-alpha)*g^2`` then ``p <- p - lr*g/(sqrt(E) + eps)``.
    """
    if not state.square_avg:
        state.square_avg = [np.zeros_like(p.data) for p in params]
    if len(state.square_avg) != len(params):
        msg = (
            f"Optimizer state tracks {len(state.square_avg)} parameters, "
            f"got {len(params)}"
        )
        raise ValueError(msg)
    for p, avg in zip(params, state.square_avg, strict=True):
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        avg *= state.alpha
        avg += (1.0 - state.alpha) * g * g
        p.data -= state.lr * g / (np.sqrt(avg) + state.eps)
        p.zero_grad()
    state.steps += 1


def clip_grad_norm(params: Sequence[Parameter], max_norm: float) -> float:
    """Rescale gradients so their global L2 norm is at most ``max_norm``.

    Returns:
        The norm before clipping.

    """
    squares = sum(float(np.sum(p.grad * p.grad)) for p in params if p.grad is not None)
    total = float(np.sqrt(squares))
    if total > max_norm > 0:
        factor = max_norm / (total + 1e-12)
        for p in params:
            if p.grad is not None:
                p.grad *= factor
    return total


class RMSprop:
    """Optimiser bound to a fixed parameter list."""

    def __init__(
        self,
        params: Sequence[Parameter],
        *,
        lr: float = LEARNING_RATE,
        alpha: float = RMSPROP_ALPHA,
        eps: float = DEFAULT_RMSPROP_EPS,
        grad_clip: float | None = None,
    ) -> None:
        self.params = list(params)
        self.state = RmspropState(lr=lr, alpha=alpha, eps=eps)
        self.grad_clip = grad_clip

    @property
    def steps(self) -> int:
        """Number of updates applied so far."""
        return self.state.steps

    def zero_grad(self) -> None:
        """Reset gradients of the bound parameters."""
        for p in self.params:
            p.zero_grad()

    def step(self) -> float | None:
        """Clip (when configured), update and zero gradients.

        Returns:
            Gradient norm before clipping, or None when clipping is disabled.

        """
        norm = None
        if self.grad_clip is not None:
            norm = clip_grad_norm(self.params, self.grad_clip)
        rmsprop_step(self.params, self.state)
        return norm
