"""Dense numerics with reverse-mode differentiation and RMSProp."""

from rodelab.core.numerics.gradcheck import check_parameter_gradients, finite_diff_check
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.optim import (
    RMSprop,
    RmspropState,
    clip_grad_norm,
    rmsprop_step,
)
from rodelab.core.numerics.tape import Tape, backward, is_grad_enabled, no_grad
from rodelab.core.numerics.tensor import (
    OpKind,
    Parameter,
    ShapeError,
    Value,
    forward_op,
)

__all__ = [
    "Module",
    "OpKind",
    "Parameter",
    "RMSprop",
    "RmspropState",
    "ShapeError",
    "Tape",
    "Value",
    "backward",
    "check_parameter_gradients",
    "clip_grad_norm",
    "finite_diff_check",
    "forward_op",
    "is_grad_enabled",
    "no_grad",
    "rmsprop_step",
]
