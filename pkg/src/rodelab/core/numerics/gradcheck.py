"""Central finite-difference gradient checks."""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from rodelab.core.numerics.tape import no_grad
from rodelab.core.numerics.tensor import Parameter, Value


def _relative_error(autodiff: np.ndarray, numeric: np.ndarray) -> float:
    if not (np.all(np.isfinite(autodiff)) and np.all(np.isfinite(numeric))):
        return float("inf")
    if autodiff.size == 0:
        return 0.0
    return float(np.max(np.abs(autodiff - numeric) / np.maximum(1.0, np.abs(numeric))))


def finite_diff_check(
    f: Callable[[Value], Value],
    point: ArrayLike,
    step: float = 1e-5,
) -> float:
    """Compare autodiff against central differences at ``point``.

    Args:
        f: Function mapping a tracked value to a scalar value.
        point: Where to evaluate.
        step: Half-width of the central difference.

    Returns:
        ``max |ad - fd| / max(1, |fd|)`` over coordinates; ``inf`` when any
        evaluation is non-finite.

    """
    base = np.array(point, dtype=np.float64)
    x = Value(base.copy(), requires_grad=True)
    out = f(x)
    if out.size != 1 or not np.all(np.isfinite(out.data)):
        return float("inf")
    if out.requires_grad:
        out.backward()
        autodiff = x.grad if x.grad is not None else np.zeros_like(base)
    else:
        autodiff = np.zeros_like(base)

    numeric = np.zeros_like(base)
    with no_grad():
        for idx in np.ndindex(base.shape):
            shifted = base.copy()
            shifted[idx] += step
            upper = f(Value(shifted)).item()
            shifted[idx] -= 2.0 * step
            lower = f(Value(shifted)).item()
            numeric[idx] = (upper - lower) / (2.0 * step)
    return _relative_error(autodiff, numeric)


def check_parameter_gradients(
    loss_fn: Callable[[], Value],
    params: Sequence[Parameter],
    step: float = 1e-5,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Finite-difference check of ``loss_fn`` with respect to parameters.

    Parameters are perturbed in place and restored. With ``max_coords`` only
    a random subset of coordinates per parameter is checked.
    """
    for p in params:
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params
    ]
    rng = rng if rng is not None else np.random.default_rng(0)

    worst = 0.0
    for p, grad in zip(params, analytic, strict=True):
        flat_idx = np.arange(p.size)
        if max_coords is not None and p.size > max_coords:
            flat_idx = rng.choice(p.size, size=max_coords, replace=False)
        flat = p.data.reshape(-1)
        ad = grad.reshape(-1)[flat_idx]
        fd = np.zeros_like(ad)
        with no_grad():
            for j, i in enumerate(flat_idx):
                original = flat[i]
                flat[i] = original + step
                upper = loss_fn().item()
                flat[i] = original - step
                lower = loss_fn().item()
                flat[i] = original
                fd[j] = (upper - lower) / (2.0 * step)
        worst = max(worst, _relative_error(ad, fd))
    for p in params:
        p.zero_grad()
    return worst
