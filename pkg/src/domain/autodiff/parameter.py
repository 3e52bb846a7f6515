"""Trainable parameters and the Adam optimizer."""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from src.domain.autodiff.tensor import ArrayLike, Tensor
from src.domain.shared_kernel import ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment estimates and the step counter of one parameter."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, data: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(data), np.zeros_like(data), 0)


class Parameter(Tensor):
    """
    A named leaf tensor that always requires gradients.

    The name is the dotted path used as the checkpoint key.
    """

    def __init__(self, data: ArrayLike, name: str = "", dtype: Optional[type] = None):
        super().__init__(data, requires_grad=True, dtype=dtype)
        self.name = name
        self.adam_state = AdamState.zeros_like(self.data)

    @property
    def tensor(self) -> Tensor:
        return self

    def assign(self, data: np.ndarray) -> None:
        """Replace the values, keeping shape and dtype."""
        data = np.asarray(data, dtype=self.data.dtype)
        if data.shape != self.data.shape:
            raise ShapeMismatchError(f"Cannot assign to {self.name}", self.shape, data.shape)
        self.data = data.copy()

    def reset_optimizer(self) -> None:
        self.adam_state = AdamState.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape})"


def adam_step(
    params: Iterable[Parameter],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """
    One bias-corrected Adam update for every parameter, then clear gradients.

    Parameters without a gradient are treated as having a zero gradient, so
    their step counter still advances.
    """
    for param in params:
        grad = param.grad if param.grad is not None else np.zeros_like(param.data)
        state = param.adam_state
        state.step += 1
        state.m = beta1 * state.m + (1.0 - beta1) * grad
        state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
        m_hat = state.m / (1.0 - beta1**state.step)
        v_hat = state.v / (1.0 - beta2**state.step)
        # New array: recorded tensors are read-only.
        param.data = param.data - lr * m_hat / (np.sqrt(v_hat) + eps)
        param.zero_grad()


def clip_grad_norm(params: Iterable[Parameter], max_norm: float) -> float:
    """Scale gradients so their global L2 norm is at most `max_norm`; return the original norm."""
    params = [p for p in params if p.grad is not None]
    total = float(np.sqrt(sum(float((p.grad * p.grad).sum()) for p in params)))
    if total > max_norm > 0:
        scale = max_norm / (total + 1e-12)
        for p in params:
            p.grad = p.grad * scale
        logger.debug(f"Clipped gradient norm {total:.4g} to {max_norm}")
    return total
