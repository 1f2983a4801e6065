"""Parameter containers shared by every network."""

from __future__ import annotations

import copy
from collections.abc import Iterator, Mapping

import numpy as np
from numpy.typing import NDArray

from rodelab.core.numerics.tensor import Parameter, ShapeError


class Module:
    """Base class for anything that owns ``Parameter`` attributes.

    Parameters are discovered from instance attributes in assignment order:
    direct ``Parameter`` values, nested ``Module`` values, and lists or tuples
    of modules. Names are dotted attribute paths (``encoder.fc.weight``).
    """

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        """Yield ``(dotted_name, parameter)`` pairs in a stable order."""
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{name}.{i}", item

    def parameters(self) -> list[Parameter]:
        """All parameters, in ``named_parameters`` order."""
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        """Reset every parameter's gradient buffer."""
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> dict[str, NDArray[np.float64]]:
        """Copies of every parameter array keyed by dotted name."""
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(
        self,
        state: Mapping[str, NDArray[np.float64]],
        *,
        strict: bool = True,
    ) -> None:
        """Overwrite parameters in place from ``state``.

        Raises:
            KeyError: If ``strict`` and names are missing or unexpected.
            ShapeError: If an array's shape differs from the parameter's.

        """
        own = dict(self.named_parameters())
        if strict:
            missing = sorted(set(own) - set(state))
            unexpected = sorted(set(state) - set(own))
            if missing or unexpected:
                msg = f"State mismatch: missing={missing}, unexpected={unexpected}"
                raise KeyError(msg)
        for name, param in own.items():
            if name not in state:
                continue
            array = np.asarray(state[name], dtype=np.float64)
            if array.shape != param.shape:
                msg = f"{name}: expected shape {param.shape}, got {array.shape}"
                raise ShapeError(msg)
            param.data[...] = array

    def copy_from(self, other: Module) -> None:
        """Copy ``other``'s parameter values into this module (target sync)."""
        self.load_state_dict(other.state_dict())

    def clone(self) -> Module:
        """Deep copy with independent parameter storage."""
        return copy.deepcopy(self)

    def num_parameters(self) -> int:
        """Total number of scalar parameters."""
        return sum(p.size for p in self.parameters())
