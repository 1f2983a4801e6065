"""Dense float64 tensors with reverse-mode automatic differentiation.

Every learnable parameter and activation in rodelab is a ``Value``. Operations
are recorded on the fly when at least one input is tracked and recording is
enabled (see ``no_grad``); ``Value.backward`` replays them through a ``Tape``.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from enum import StrEnum
from typing import Any, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit

from rodelab.core.numerics.tape import backward as _tape_backward
from rodelab.core.numerics.tape import is_grad_enabled

Array: TypeAlias = NDArray[np.float64]
BackwardFn: TypeAlias = Callable[[Array], tuple[Array | None, ...]]

_tape_ids = itertools.count()


class ShapeError(ValueError):
    """Operand shapes do not conform to the operation's arity rules."""


class Value:
    """Dense array node in the differentiation graph.

    Attributes:
        data: The forward result, float64.
        grad: Same-shape gradient buffer for tracked leaves, else None.
        requires_grad: Whether gradient flows into this value.
        tape_id: Creation-order identifier of the node.
        op: Name of the primitive that produced the value ("" for leaves).

    """

    __slots__ = (
        "_backward_fn",
        "_parents",
        "data",
        "grad",
        "name",
        "op",
        "requires_grad",
        "tape_id",
    )

    # Let numpy arrays on the left defer to Value's reflected operators.
    __array_ufunc__ = None

    def __init__(
        self,
        data: ArrayLike,
        *,
        requires_grad: bool = False,
        name: str = "",
    ) -> None:
        self.data: Array = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Array | None = np.zeros_like(self.data) if requires_grad else None
        self.name = name
        self.op = ""
        self.tape_id = next(_tape_ids)
        self._parents: tuple[Value, ...] = ()
        self._backward_fn: BackwardFn | None = None

    # ------------------ Graph plumbing ------------------
    @property
    def parents(self) -> tuple[Value, ...]:
        """Inputs of the operation that produced this value."""
        return self._parents

    @property
    def is_leaf(self) -> bool:
        """True for values not produced by a recorded operation."""
        return not self._parents

    def backward_fn(self, grad: Array) -> tuple[Array | None, ...]:
        """Map the upstream gradient to one gradient per parent."""
        if self._backward_fn is None:
            msg = "Leaf values have no backward function."
            raise RuntimeError(msg)
        return self._backward_fn(grad)

    def accumulate_grad(self, grad: Array) -> None:
        """Add ``grad`` into the leaf buffer."""
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self) -> None:
        """Differentiate this scalar with respect to every tracked leaf."""
        _tape_backward(self)

    def zero_grad(self) -> None:
        """Reset the gradient buffer to zeros."""
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def detach(self) -> Value:
        """Return an untracked value sharing this value's data."""
        return Value(self.data)

    # ------------------ Array protocol ------------------
    @property
    def shape(self) -> tuple[int, ...]:
        """Dimension sizes."""
        return self.data.shape

    @property
    def ndim(self) -> int:
        """Number of dimensions."""
        return self.data.ndim

    @property
    def size(self) -> int:
        """Number of elements."""
        return self.data.size

    @property
    def T(self) -> Value:
        """Swap the last two axes."""
        return transpose(self)

    def item(self) -> float:
        """Return the single element as a Python float."""
        if self.size != 1:
            msg = f"item() needs a single element, got shape {self.shape}"
            raise ShapeError(msg)
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> Array:
        """Return a copy of the data."""
        return self.data.copy()

    def reshape(self, *shape: int) -> Value:
        """Reshape, keeping the gradient path."""
        return reshape(self, shape)

    def sum(self, axis: int | tuple[int, ...] | None = None) -> Value:
        """Sum over ``axis`` (all axes by default)."""
        return reduce_sum(self, axis=axis)

    def mean(self, axis: int | tuple[int, ...] | None = None) -> Value:
        """Mean over ``axis`` (all axes by default)."""
        return reduce_mean(self, axis=axis)

    def __getitem__(self, index: Any) -> Value:  # noqa: ANN401
        return take(self, index)

    def __add__(self, other: Value | ArrayLike) -> Value:
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> Value:
        return add(other, self)

    def __sub__(self, other: Value | ArrayLike) -> Value:
        return add(self, neg(as_value(other)))

    def __rsub__(self, other: ArrayLike) -> Value:
        return add(other, neg(self))

    def __mul__(self, other: Value | ArrayLike) -> Value:
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> Value:
        return mul(other, self)

    def __neg__(self) -> Value:
        return neg(self)

    def __matmul__(self, other: Value | ArrayLike) -> Value:
        return matmul(self, other)

    def __rmatmul__(self, other: ArrayLike) -> Value:
        return matmul(other, self)

    def __repr__(self) -> str:
        tracked = ", requires_grad=True" if self.requires_grad else ""
        return f"Value(shape={self.shape}{tracked})"


class Parameter(Value):
    """Learnable leaf value; owns its data and always tracks gradients."""

    __slots__ = ()

    def __init__(self, data: ArrayLike, *, name: str = "") -> None:
        array = np.array(data, dtype=np.float64)
        super().__init__(array, requires_grad=True, name=name)


# ------------------ Helpers ------------------
def as_value(x: Value | ArrayLike) -> Value:
    """Wrap constants as untracked values."""
    return x if isinstance(x, Value) else Value(x)


def _record(
    data: Array,
    parents: tuple[Value, ...],
    backward_fn: BackwardFn,
    op: str,
) -> Value:
    out = Value(data)
    out.op = op
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents  # noqa: SLF001
        out._backward_fn = backward_fn  # noqa: SLF001
    return out


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Value, b: Value) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        msg = f"{op}: shapes {a.shape} and {b.shape} do not broadcast"
        raise ShapeError(msg) from e


def _is_basic_index(index: Any) -> bool:  # noqa: ANN401
    items = index if isinstance(index, tuple) else (index,)
    return all(
        isinstance(i, (int, np.integer, slice)) or i is Ellipsis or i is None
        for i in items
    )


# ------------------ Primitive operations ------------------
def add(a: Value | ArrayLike, b: Value | ArrayLike) -> Value:
    """Elementwise sum with broadcasting."""
    a, b = as_value(a), as_value(b)
    _broadcast_shape("add", a, b)

    def backward(g: Array) -> tuple[Array, Array]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _record(a.data + b.data, (a, b), backward, "add")


def neg(a: Value) -> Value:
    """Elementwise negation."""
    return _record(-a.data, (a,), lambda g: (-g,), "neg")


def mul(a: Value | ArrayLike, b: Value | ArrayLike) -> Value:
    """Elementwise product with broadcasting."""
    a, b = as_value(a), as_value(b)
    _broadcast_shape("mul", a, b)

    def backward(g: Array) -> tuple[Array, Array]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _record(a.data * b.data, (a, b), backward, "mul")


def scale(a: Value, factor: float) -> Value:
    """Multiply by a scalar constant."""
    return _record(a.data * factor, (a,), lambda g: (g * factor,), "scale")


def matmul(a: Value | ArrayLike, b: Value | ArrayLike) -> Value:
    """Matrix product over the last two axes, batching the leading ones."""
    a, b = as_value(a), as_value(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:  # noqa: PLR2004
        msg = f"matmul: cannot multiply shapes {a.shape} and {b.shape}"
        raise ShapeError(msg)
    try:
        data = a.data @ b.data
    except ValueError as e:
        msg = f"matmul: batch dimensions of {a.shape} and {b.shape} do not broadcast"
        raise ShapeError(msg) from e

    def backward(g: Array) -> tuple[Array, Array]:
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _record(data, (a, b), backward, "matmul")


def transpose(a: Value) -> Value:
    """Swap the last two axes."""
    if a.ndim < 2:  # noqa: PLR2004
        msg = f"transpose needs at least 2 dimensions, got shape {a.shape}"
        raise ShapeError(msg)
    return _record(
        np.swapaxes(a.data, -1, -2),
        (a,),
        lambda g: (np.swapaxes(g, -1, -2),),
        "transpose",
    )


def relu(a: Value) -> Value:
    """Rectified linear unit; subgradient 0 at 0."""
    mask = a.data > 0
    return _record(a.data * mask, (a,), lambda g: (g * mask,), "relu")


def sigmoid(a: Value) -> Value:
    """Logistic function."""
    s = expit(a.data)
    return _record(s, (a,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def tanh(a: Value) -> Value:
    """Hyperbolic tangent."""
    t = np.tanh(a.data)
    return _record(t, (a,), lambda g: (g * (1.0 - t * t),), "tanh")


def absolute(a: Value) -> Value:
    """Elementwise absolute value; subgradient 0 at 0."""
    sign = np.sign(a.data)
    return _record(np.abs(a.data), (a,), lambda g: (g * sign,), "abs")


def reduce_sum(
    a: Value,
    axis: int | tuple[int, ...] | None = None,
    *,
    keepdims: bool = False,
) -> Value:
    """Sum over ``axis``."""
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g: Array) -> tuple[Array]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)

    return _record(np.asarray(data), (a,), backward, "sum")


def reduce_mean(
    a: Value,
    axis: int | tuple[int, ...] | None = None,
    *,
    keepdims: bool = False,
) -> Value:
    """Arithmetic mean over ``axis``."""
    if axis is None:
        count = a.size
    else:
        count = int(np.prod([a.shape[i] for i in np.atleast_1d(axis)]))
    return scale(reduce_sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def squared_error(a: Value | ArrayLike, b: Value | ArrayLike) -> Value:
    """Elementwise (a - b)^2 with broadcasting."""
    a, b = as_value(a), as_value(b)
    _broadcast_shape("squared_error", a, b)
    diff = a.data - b.data

    def backward(g: Array) -> tuple[Array, Array]:
        ga = 2.0 * diff * g
        return _unbroadcast(ga, a.shape), _unbroadcast(-ga, b.shape)

    return _record(diff * diff, (a, b), backward, "squared_error")


def concat(values: Sequence[Value | ArrayLike], axis: int = -1) -> Value:
    """Join values along an existing axis."""
    parts = tuple(as_value(v) for v in values)
    try:
        data = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        shapes = [p.shape for p in parts]
        msg = f"concat: incompatible shapes {shapes} along axis {axis}"
        raise ShapeError(msg) from e
    offsets = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def backward(g: Array) -> tuple[Array, ...]:
        return tuple(np.split(g, offsets, axis=axis))

    return _record(data, parts, backward, "concat")


def stack(values: Sequence[Value | ArrayLike], axis: int = 0) -> Value:
    """Join same-shape values along a new axis."""
    parts = tuple(as_value(v) for v in values)
    try:
        data = np.stack([p.data for p in parts], axis=axis)
    except ValueError as e:
        shapes = [p.shape for p in parts]
        msg = f"stack: shapes differ: {shapes}"
        raise ShapeError(msg) from e

    def backward(g: Array) -> tuple[Array, ...]:
        return tuple(np.take(g, i, axis=axis) for i in range(len(parts)))

    return _record(data, parts, backward, "stack")


def reshape(a: Value, shape: Sequence[int]) -> Value:
    """Reshape without copying the gradient path."""
    try:
        data = a.data.reshape(tuple(shape))
    except ValueError as e:
        msg = f"reshape: cannot reshape {a.shape} into {tuple(shape)}"
        raise ShapeError(msg) from e
    return _record(data, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def take(a: Value, index: Any) -> Value:  # noqa: ANN401
    """Slice or fancy-index ``a`` (``a[index]``)."""
    try:
        data = a.data[index]
    except IndexError as e:
        msg = f"take: index {index!r} invalid for shape {a.shape}"
        raise ShapeError(msg) from e
    basic = _is_basic_index(index)

    def backward(g: Array) -> tuple[Array]:
        out = np.zeros_like(a.data)
        if basic:
            out[index] += g
        else:
            np.add.at(out, index, g)
        return (out,)

    return _record(np.array(data), (a,), backward, "take")


def gather(a: Value, indices: ArrayLike, axis: int = -1) -> Value:
    """Pick entries along ``axis`` (``np.take_along_axis`` semantics)."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != a.ndim:
        msg = f"gather: index rank {idx.ndim} does not match value rank {a.ndim}"
        raise ShapeError(msg)
    try:
        data = np.take_along_axis(a.data, idx, axis=axis)
    except (IndexError, ValueError) as e:
        msg = f"gather: indices of shape {idx.shape} invalid for shape {a.shape}"
        raise ShapeError(msg) from e

    def backward(g: Array) -> tuple[Array]:
        out = np.zeros_like(a.data)
        coords = list(np.indices(idx.shape, sparse=True))
        coords[axis] = idx
        np.add.at(out, tuple(coords), g)
        return (out,)

    return _record(data, (a,), backward, "gather")


# ------------------ Dispatch by kind ------------------
class OpKind(StrEnum):
    """Primitive operations understood by ``forward_op``."""

    MATMUL = "matmul"
    ADD = "add"
    MUL = "mul"
    RELU = "relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    ABS = "abs"
    SUM = "sum"
    MEAN = "mean"
    SQUARED_ERROR = "squared_error"
    CONCAT = "concat"
    TAKE = "take"
    GATHER = "gather"
    SCALE = "scale"


_ARITY = {
    OpKind.MATMUL: 2,
    OpKind.ADD: 2,
    OpKind.MUL: 2,
    OpKind.SQUARED_ERROR: 2,
    OpKind.RELU: 1,
    OpKind.SIGMOID: 1,
    OpKind.TANH: 1,
    OpKind.ABS: 1,
    OpKind.SUM: 1,
    OpKind.MEAN: 1,
    OpKind.TAKE: 1,
    OpKind.GATHER: 1,
    OpKind.SCALE: 1,
}


def forward_op(
    kind: OpKind | str,
    *inputs: Value,
    **options: Any,  # noqa: ANN401
) -> Value:
    """Apply the primitive ``kind`` to ``inputs``.

    Args:
        kind: Which primitive to run.
        *inputs: Operands; ``concat`` takes any number.
        **options: Extra arguments (``axis``, ``index``, ``indices``, ``factor``).

    Returns:
        The recorded result.

    Raises:
        ShapeError: If the operand count or shapes do not fit the primitive.

    """
    kind = OpKind(kind)
    expected = _ARITY.get(kind)
    if expected is not None and len(inputs) != expected:
        msg = f"{kind}: expected {expected} input(s), got {len(inputs)}"
        raise ShapeError(msg)
    match kind:
        case OpKind.MATMUL:
            return matmul(*inputs)
        case OpKind.ADD:
            return add(*inputs)
        case OpKind.MUL:
            return mul(*inputs)
        case OpKind.SQUARED_ERROR:
            return squared_error(*inputs)
        case OpKind.RELU:
            return relu(inputs[0])
        case OpKind.SIGMOID:
            return sigmoid(inputs[0])
        case OpKind.TANH:
            return tanh(inputs[0])
        case OpKind.ABS:
            return absolute(inputs[0])
        case OpKind.SUM:
            return reduce_sum(inputs[0], axis=options.get("axis"))
        case OpKind.MEAN:
            return reduce_mean(inputs[0], axis=options.get("axis"))
        case OpKind.CONCAT:
            return concat(inputs, axis=options.get("axis", -1))
        case OpKind.TAKE:
            return take(inputs[0], options["index"])
        case OpKind.GATHER:
            return gather(inputs[0], options["indices"], axis=options.get("axis", -1))
        case OpKind.SCALE:
            return scale(inputs[0], float(options["factor"]))
