"""
Tensor and tape for reverse-mode differentiation.

Operations record a TapeEntry on the tape of the calling thread whenever
gradient recording is enabled and at least one input requires gradients.
`backward` replays the tape in reverse, accumulating gradients into leaf
tensors, and then clears it.
"""

import contextlib
import logging
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from src.domain.model.enums import FloatWidth
from src.domain.shared_kernel import NonScalarLossError, ShapeMismatchError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_DTYPES = {FloatWidth.FLOAT32: np.float32, FloatWidth.FLOAT64: np.float64}
_default_dtype: type = np.float64
_local = threading.local()


def get_default_dtype() -> type:
    return _default_dtype


def set_default_dtype(width: Union[FloatWidth, int]) -> None:
    """Select the float width used for newly created tensors."""
    global _default_dtype
    _default_dtype = _DTYPES[FloatWidth(width)]


@contextlib.contextmanager
def default_float_width(width: Union[FloatWidth, int]) -> Iterator[None]:
    global _default_dtype
    previous = _default_dtype
    set_default_dtype(width)
    try:
        yield
    finally:
        _default_dtype = previous


def is_grad_enabled() -> bool:
    return getattr(_local, "grad_enabled", True)


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable recording for the current thread."""
    previous = is_grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


class Tensor:
    """
    n-dimensional array participating in a reverse-mode differentiation graph.

    The public constructor copies its input so later mutation of the caller's
    array cannot alter recorded values. `grad` is allocated lazily and always
    has the same shape as `data`.
    """

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Optional[type] = None,
    ):
        self.data: np.ndarray = np.array(data, dtype=dtype or _default_dtype)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._entry: Optional["TapeEntry"] = None

    @classmethod
    def wrap(cls, array: np.ndarray, requires_grad: bool = False) -> "Tensor":
        """Adopt an array produced by an operation without copying it."""
        tensor = cls.__new__(cls)
        tensor.data = array
        tensor.requires_grad = requires_grad
        tensor.grad = None
        tensor._entry = None
        return tensor

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._entry is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeMismatchError("item() needs a single-element tensor", 1, self.data.size)
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray) -> None:
        grad = np.asarray(grad, dtype=self.data.dtype).reshape(self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    # Operator sugar; the operations live in `functional`.

    def __add__(self, other):
        from src.domain.autodiff import functional as F

        return F.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from src.domain.autodiff import functional as F

        return F.sub(self, other)

    def __rsub__(self, other):
        from src.domain.autodiff import functional as F

        return F.sub(other, self)

    def __mul__(self, other):
        from src.domain.autodiff import functional as F

        return F.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from src.domain.autodiff import functional as F

        return F.div(self, other)

    def __neg__(self):
        from src.domain.autodiff import functional as F

        return F.neg(self)

    def __matmul__(self, other):
        from src.domain.autodiff import functional as F

        return F.matmul(self, other)

    def __getitem__(self, key):
        from src.domain.autodiff import functional as F

        return F.index(self, key)


@dataclass
class TapeEntry:
    """One recorded operation: its inputs, its output and its backward rule."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """Ordered record of operations for one thread of execution."""

    def __init__(self) -> None:
        self._entries: list[TapeEntry] = []

    @property
    def entries(self) -> tuple[TapeEntry, ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def record(
        self,
        op: str,
        inputs: Sequence[Tensor],
        output: Tensor,
        backward_fn: BackwardFn,
    ) -> None:
        for tensor in inputs:
            tensor.data.flags.writeable = False
        entry = TapeEntry(op=op, inputs=tuple(inputs), output=output, backward=backward_fn)
        output._entry = entry
        output.requires_grad = True
        self._entries.append(entry)

    def clear(self) -> None:
        for entry in self._entries:
            entry.output._entry = None
            entry.output.requires_grad = False
        self._entries.clear()

    def run_backward(self, loss: Tensor) -> None:
        if loss.size != 1:
            raise NonScalarLossError(f"backward needs a scalar loss, got shape {loss.shape}")
        seed = np.ones_like(loss.data)
        if loss.is_leaf:
            if loss.requires_grad:
                loss.accumulate_grad(seed)
            return
        pending: dict[int, np.ndarray] = {id(loss): seed}
        visited = 0
        for entry in reversed(self._entries):
            grad = pending.pop(id(entry.output), None)
            if grad is None:
                continue
            visited += 1
            input_grads = entry.backward(grad)
            for tensor, input_grad in zip(entry.inputs, input_grads):
                if input_grad is None or not tensor.requires_grad:
                    continue
                if tensor.is_leaf:
                    tensor.accumulate_grad(input_grad)
                else:
                    key = id(tensor)
                    pending[key] = pending[key] + input_grad if key in pending else input_grad
        logger.debug(f"Backward visited {visited} of {len(self._entries)} recorded operations")
        self.clear()


def current_tape() -> Tape:
    tape = getattr(_local, "tape", None)
    if tape is None:
        tape = Tape()
        _local.tape = tape
    return tape


@contextlib.contextmanager
def use_tape(tape: Tape) -> Iterator[Tape]:
    """Record onto `tape` for the duration of the block."""
    previous = getattr(_local, "tape", None)
    _local.tape = tape
    try:
        yield tape
    finally:
        _local.tape = previous


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor.wrap(np.asarray(value, dtype=_default_dtype))


def make_result(
    op: str,
    data: np.ndarray,
    inputs: Sequence[Tensor],
    backward_fn: BackwardFn,
) -> Tensor:
    """Wrap an operation's output and record it when any input needs gradients."""
    out = Tensor.wrap(data)
    if is_grad_enabled() and any(t.requires_grad for t in inputs):
        current_tape().record(op, inputs, out, backward_fn)
    return out


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable leaf that requires gradients."""
    current_tape().run_backward(loss)
