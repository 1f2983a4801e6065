"""Differentiation record and gradient-recording switch.

The graph is built while values are computed (define-by-run). A ``Tape`` is
derived from a scalar loss by walking parent links, and replays the recorded
operations in reverse topological order exactly once per node.
"""

from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager
from typing import TYPE_CHECKING, final

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from rodelab.core.numerics.tensor import Value

_grad_enabled = True


def is_grad_enabled() -> bool:
    """Return True when new operations are being recorded."""
    return _grad_enabled


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable recording inside the block (acting, target networks)."""
    global _grad_enabled  # noqa: PLW0603
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


@final
class Tape:
    """Operations that produced ``root``, in topological order.

    Attributes:
        root: The value the tape was derived from.
        nodes: Tracked values, parents before children.

    """

    def __init__(self, root: Value) -> None:
        self.root = root
        self.nodes: list[Value] = self._topological_order(root)

    def __len__(self) -> int:
        return len(self.nodes)

    @staticmethod
    def _topological_order(root: Value) -> list[Value]:
        # Iterative post-order DFS; recurrent unrolls are too deep for recursion.
        order: list[Value] = []
        visited: set[int] = set()
        stack: list[tuple[Value, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            stack.extend(
                (parent, False)
                for parent in node.parents
                if parent.requires_grad and id(parent) not in visited
            )
        return order

    def replay(self, seed: NDArray[np.float64]) -> None:
        """Propagate ``seed`` from the root back to every tracked leaf.

        Intermediate gradients live only for the duration of the replay; leaf
        gradients accumulate into ``Value.grad`` until zeroed.
        """
        grads: dict[int, NDArray[np.float64]] = {id(self.root): seed}
        for node in reversed(self.nodes):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node.is_leaf:
                node.accumulate_grad(grad)
                continue
            parent_grads = node.backward_fn(grad)
            for parent, parent_grad in zip(node.parents, parent_grads, strict=True):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + parent_grad
                else:
                    grads[key] = parent_grad


def backward(loss: Value) -> None:
    """Populate ``grad`` of every tracked leaf with d(loss)/d(leaf).

    Args:
        loss: Scalar value produced by recorded operations.

    Raises:
        ValueError: If the loss is not scalar or depends on no tracked value.

    """
    if loss.size != 1:
        msg = f"backward needs a scalar loss, got shape {loss.shape}"
        raise ValueError(msg)
    if not loss.requires_grad:
        msg = "Loss does not depend on any tracked value; tape is empty."
        raise ValueError(msg)
    Tape(loss).replay(np.ones_like(loss.data))
