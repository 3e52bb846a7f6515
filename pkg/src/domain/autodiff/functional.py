"""Pointwise, reduction and structural operations with exact backward rules."""

from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from src.domain.autodiff.tensor import ArrayLike, Tensor, as_tensor, make_result
from src.domain.shared_kernel import ShapeMismatchError

Operand = Union[Tensor, ArrayLike]
Axis = Union[int, tuple[int, ...], None]


class ElementwiseFn(str, Enum):
    RELU = "relu"
    SOFTPLUS = "softplus"
    SIGMOID = "sigmoid"
    EXP = "exp"
    NEG = "neg"
    ADD = "add"
    MUL = "mul"


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum out the axes that broadcasting expanded so `grad` matches `shape`."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeMismatchError(f"Operands cannot be broadcast: {e}", a.shape, b.shape) from e


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


# --- binary ---


def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)

    def backward(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return make_result("add", a.data + b.data, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)

    def backward(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return make_result("sub", a.data - b.data, (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)

    def backward(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return make_result("mul", a.data * b.data, (a, b), backward)


def div(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)

    def backward(g):
        return (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return make_result("div", a.data / b.data, (a, b), backward)


def matmul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError("matmul needs [m,k] @ [k,n]", (a.shape[0:1], "k"), b.shape)

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return make_result("matmul", a.data @ b.data, (a, b), backward)


def where(mask: np.ndarray, a: Operand, b: Operand) -> Tensor:
    """Select `a` where `mask` holds, else `b`. The mask is a constant."""
    a, b = as_tensor(a), as_tensor(b)
    mask = np.asarray(mask, dtype=bool)

    def backward(g):
        return (
            unbroadcast(np.where(mask, g, 0.0), a.shape),
            unbroadcast(np.where(mask, 0.0, g), b.shape),
        )

    return make_result("where", np.where(mask, a.data, b.data), (a, b), backward)


# --- unary ---


def neg(x: Operand) -> Tensor:
    x = as_tensor(x)
    return make_result("neg", -x.data, (x,), lambda g: (-g,))


def exp(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = np.exp(x.data)
    return make_result("exp", out, (x,), lambda g: (g * out,))


def relu(x: Operand) -> Tensor:
    x = as_tensor(x)
    positive = x.data > 0
    return make_result("relu", np.where(positive, x.data, 0.0), (x,), lambda g: (g * positive,))


def softplus(x: Operand) -> Tensor:
    x = as_tensor(x)
    return make_result(
        "softplus", np.logaddexp(0.0, x.data), (x,), lambda g: (g * _sigmoid(x.data),)
    )


def sigmoid(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = _sigmoid(x.data)
    return make_result("sigmoid", out, (x,), lambda g: (g * out * (1.0 - out),))


def clamp_min(x: Operand, minimum: float) -> Tensor:
    x = as_tensor(x)
    keep = x.data > minimum
    return make_result(
        "clamp_min", np.where(keep, x.data, minimum), (x,), lambda g: (g * keep,)
    )


_UNARY = {
    ElementwiseFn.RELU: relu,
    ElementwiseFn.SOFTPLUS: softplus,
    ElementwiseFn.SIGMOID: sigmoid,
    ElementwiseFn.EXP: exp,
    ElementwiseFn.NEG: neg,
}
_BINARY = {ElementwiseFn.ADD: add, ElementwiseFn.MUL: mul}


def elementwise(
    x: Operand, fn: Union[ElementwiseFn, str], other: Optional[Operand] = None
) -> Tensor:
    """Apply a named pointwise function; binary variants take `other`."""
    fn = ElementwiseFn(fn)
    if fn in _BINARY:
        if other is None:
            raise ShapeMismatchError(f"{fn.value} needs a second operand")
        return _BINARY[fn](x, other)
    return _UNARY[fn](x)


# --- reductions ---


def sum(x: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_result("sum", np.asarray(out), (x,), backward)


def mean(x: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def cumsum(x: Operand, axis: int, exclusive: bool = False) -> Tensor:
    """Running sum along `axis`; the exclusive form starts every run at zero."""
    x = as_tensor(x)
    out = np.cumsum(x.data, axis=axis)
    if exclusive:
        out = out - x.data

    def backward(g):
        flipped = np.flip(np.cumsum(np.flip(g, axis=axis), axis=axis), axis=axis)
        return (flipped - g if exclusive else flipped,)

    return make_result("cumsum", out, (x,), backward)


def variance(x: Operand, axis: int = 0) -> Tensor:
    """
    Population variance along `axis`, as mean of squares minus square of mean.

    Values are shifted by the first slice first, so slices that agree give an
    exact zero; the result is clamped at zero against rounding.
    """
    x = as_tensor(x)
    count = x.shape[axis]
    first = np.take(x.data, [0], axis=axis)
    shifted = x.data - first
    raw = (shifted * shifted).mean(axis=axis) - shifted.mean(axis=axis) ** 2
    positive = raw > 0

    def backward(g):
        centered = x.data - x.data.mean(axis=axis, keepdims=True)
        scale = np.expand_dims(g * positive, axis)
        return (2.0 * centered * scale / count,)

    return make_result("variance", np.where(positive, raw, 0.0), (x,), backward)


# --- structure ---


def reshape(x: Operand, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    return make_result("reshape", x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def transpose(x: Operand, axes: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    inverse = np.argsort(axes)
    return make_result(
        "transpose", x.data.transpose(axes), (x,), lambda g: (g.transpose(inverse),)
    )


def broadcast_to(x: Operand, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    try:
        out = np.broadcast_to(x.data, tuple(shape))
    except ValueError as e:
        raise ShapeMismatchError("Cannot broadcast", tuple(shape), x.shape) from e
    return make_result("broadcast_to", out, (x,), lambda g: (unbroadcast(g, x.shape),))


def concat(tensors: Sequence[Operand], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeMismatchError(
            f"Cannot concatenate along axis {axis}", None, [t.shape for t in tensors]
        ) from e
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return make_result("concat", out, tensors, backward)


def stack(tensors: Sequence[Operand], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    expanded = [reshape(t, t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors]
    return concat(expanded, axis=axis)


def index(x: Operand, key) -> Tensor:
    """Basic or advanced indexing; repeated indices accumulate in backward."""
    x = as_tensor(x)

    def backward(g):
        grad = np.zeros_like(x.data)
        np.add.at(grad, key, g)
        return (grad,)

    return make_result("index", np.asarray(x.data[key]), (x,), backward)


def pad_edge(x: Operand, pad_width: Sequence[tuple[int, int]]) -> Tensor:
    """Extend each axis by replicating its border values."""
    x = as_tensor(x)
    pad_width = [tuple(p) for p in pad_width]
    if len(pad_width) != x.ndim or any(b < 0 or a < 0 for b, a in pad_width):
        raise ShapeMismatchError("pad_edge needs one non-negative pair per axis", x.ndim, pad_width)
    out = np.pad(x.data, pad_width, mode="edge")

    def backward(g):
        for axis, (before, after) in enumerate(pad_width):
            if before == 0 and after == 0:
                continue
            extent = g.shape[axis] - before - after
            core = np.take(g, np.arange(before, before + extent), axis=axis).copy()
            head = np.take(g, np.arange(0, before + 1), axis=axis).sum(axis=axis)
            tail_index = np.arange(before + extent - 1, g.shape[axis])
            tail = np.take(g, tail_index, axis=axis).sum(axis=axis)
            first = [slice(None)] * g.ndim
            last = [slice(None)] * g.ndim
            first[axis] = 0
            last[axis] = extent - 1
            if extent == 1:
                core[tuple(first)] = head + tail - np.take(g, before, axis=axis)
            else:
                core[tuple(first)] = head
                core[tuple(last)] = tail
            g = core
        return (g,)

    return make_result("pad_edge", out, (x,), backward)
