"""Batch normalization over every axis except the channel axis."""

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from src.domain.autodiff.tensor import Tensor, as_tensor, get_default_dtype, make_result
from src.domain.model.enums import BatchNormMode
from src.domain.shared_kernel import ShapeMismatchError

DEFAULT_MOMENTUM = 0.1
DEFAULT_EPS = 1e-5


@dataclass
class RunningStats:
    """Per-channel running mean and unbiased variance."""

    mean: np.ndarray
    var: np.ndarray
    momentum: float = DEFAULT_MOMENTUM
    updates: int = field(default=0)

    @classmethod
    def fresh(cls, channels: int, momentum: float = DEFAULT_MOMENTUM) -> "RunningStats":
        dtype = get_default_dtype()
        return cls(np.zeros(channels, dtype=dtype), np.ones(channels, dtype=dtype), momentum)

    def update(self, batch_mean: np.ndarray, batch_var_unbiased: np.ndarray) -> None:
        m = self.momentum
        self.mean = (1.0 - m) * self.mean + m * batch_mean
        self.var = (1.0 - m) * self.var + m * batch_var_unbiased
        self.updates += 1


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running: RunningStats,
    mode: Union[BatchNormMode, str] = BatchNormMode.TRAIN,
    eps: float = DEFAULT_EPS,
) -> Tensor:
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    mode = BatchNormMode(mode)
    if x.ndim < 2:
        raise ShapeMismatchError("batch_norm needs a channel axis", ">= 2", x.ndim)
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise ShapeMismatchError("gamma/beta must be per-channel", (channels,), gamma.shape)
    axes = (0,) + tuple(range(2, x.ndim))
    count = x.size // channels
    view = (1, channels) + (1,) * (x.ndim - 2)

    if mode is BatchNormMode.TRAIN:
        if count < 2:
            raise ShapeMismatchError(
                "Train-mode batch_norm needs more than one element per channel", "> 1", count
            )
        mu = x.data.mean(axis=axes)
        centered = x.data - mu.reshape(view)
        var = (centered * centered).mean(axis=axes)
        running.update(mu, var * count / (count - 1))
    else:
        mu = running.mean
        centered = x.data - mu.reshape(view)
        var = running.var

    inv_std = (1.0 / np.sqrt(var + eps)).reshape(view)
    xhat = centered * inv_std
    out = gamma.data.reshape(view) * xhat + beta.data.reshape(view)

    def backward(g):
        ggamma = (g * xhat).sum(axis=axes)
        gbeta = g.sum(axis=axes)
        gxhat = g * gamma.data.reshape(view)
        if mode is BatchNormMode.TRAIN:
            gx = inv_std * (
                gxhat
                - gxhat.mean(axis=axes, keepdims=True)
                - xhat * (gxhat * xhat).mean(axis=axes, keepdims=True)
            )
        else:
            gx = gxhat * inv_std
        return gx, ggamma, gbeta

    return make_result(f"batch_norm_{mode.value}", out, (x, gamma, beta), backward)
