"""Linear, GRU and two-layer MLP building blocks."""

from __future__ import annotations

import numpy as np

from rodelab.config.constants import RNN_HIDDEN_DIM
from rodelab.core.numerics.module import Module
from rodelab.core.numerics.tensor import (
    Parameter,
    ShapeError,
    Value,
    add,
    as_value,
    matmul,
    mul,
    relu,
    reshape,
    sigmoid,
    tanh,
    take,
    transpose,
)


def _uniform(
    rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]
) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    """Affine map ``x @ W.T + b`` over the last axis.

    Attributes:
        weight: ``(out_features, in_features)`` matrix.
        bias: ``(out_features,)`` vector, or None.

    """

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        *,
        bias: bool = True,
    ) -> None:
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(_uniform(rng, in_features, (out_features, in_features)))
        self.bias = (
            Parameter(_uniform(rng, in_features, (out_features,))) if bias else None
        )

    def __call__(self, x: Value | np.ndarray) -> Value:
        """Apply the layer to ``x`` of shape ``(..., in_features)``."""
        x = as_value(x)
        if x.ndim == 0 or x.shape[-1] != self.in_features:
            msg = (
                f"Linear expects last dimension {self.in_features}, got shape {x.shape}"
            )
            raise ShapeError(msg)
        lead = x.shape[:-1]
        flat = reshape(x, (-1, self.in_features))
        out = matmul(flat, transpose(self.weight))
        if self.bias is not None:
            out = add(out, self.bias)
        return reshape(out, (*lead, self.out_features))


class MLP(Module):
    """Affine, ReLU, affine."""

    def __init__(
        self,
        in_features: int,
        hidden: int,
        out_features: int,
        rng: np.random.Generator,
    ) -> None:
        self.fc1 = Linear(in_features, hidden, rng)
        self.fc2 = Linear(hidden, out_features, rng)

    def __call__(self, x: Value | np.ndarray) -> Value:
        """Forward pass."""
        return self.fc2(relu(self.fc1(x)))


def mlp_forward(layers: MLP, x: Value | np.ndarray) -> Value:
    """Run ``x`` through a two-layer MLP."""
    return layers(x)


class GRUCell(Module):
    """Gated recurrent unit with reset, update and candidate gates.

    ``r = s(W_ir x + W_hr h)``, ``z = s(W_iz x + W_hz h)``,
    ``n = tanh(W_in x + r * (W_hn h))``, ``h' = (1 - z) * n + z * h``.
    """

    def __init__(
        self,
        input_dim: int,
        rng: np.random.Generator,
        hidden_dim: int = RNN_HIDDEN_DIM,
    ) -> None:
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.input_gates = Linear(input_dim, 3 * hidden_dim, rng)
        self.hidden_gates = Linear(hidden_dim, 3 * hidden_dim, rng)

    def initial_hidden(self, *lead: int) -> Value:
        """Zero hidden state of shape ``(*lead, hidden_dim)``."""
        return Value(np.zeros((*lead, self.hidden_dim)))

    def _gate(self, v: Value, i: int) -> Value:
        h = self.hidden_dim
        return take(v, (Ellipsis, slice(i * h, (i + 1) * h)))

    def __call__(self, x: Value | np.ndarray, hidden: Value | np.ndarray) -> Value:
        """One recurrent step."""
        x, hidden = as_value(x), as_value(hidden)
        if x.shape[-1] != self.input_dim or hidden.shape[-1] != self.hidden_dim:
            msg = (
                f"GRUCell({self.input_dim}, {self.hidden_dim}) got input {x.shape} "
                f"and hidden {hidden.shape}"
            )
            raise ShapeError(msg)
        gi = self.input_gates(x)
        gh = self.hidden_gates(hidden)
        r = sigmoid(add(self._gate(gi, 0), self._gate(gh, 0)))
        z = sigmoid(add(self._gate(gi, 1), self._gate(gh, 1)))
        n = tanh(add(self._gate(gi, 2), mul(r, self._gate(gh, 2))))
        return add(mul(add(1.0, -z), n), mul(z, hidden))


def gru_step(cell: GRUCell, x: Value | np.ndarray, hidden: Value | np.ndarray) -> Value:
    """Advance ``cell`` by one step."""
    return cell(x, hidden)
