"""Building blocks with Kaiming fan-in initialization."""

from typing import Optional

import numpy as np

from src.domain.autodiff import Module, Parameter, RunningStats, Tensor, batch_norm
from src.domain.autodiff import functional as F
from src.domain.autodiff.conv import conv_nd, conv_transpose_nd, same_padding
from src.domain.autodiff.normalization import DEFAULT_EPS, DEFAULT_MOMENTUM


def kaiming(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)


class Linear(Module):
    """y = x·W + b with W stored as [in, out]."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.weight = Parameter(kaiming(rng, (in_features, out_features), in_features))
        self.bias = Parameter(np.zeros(out_features))

    def forward(self, x: Tensor) -> Tensor:
        return F.add(F.matmul(x, self.weight), self.bias)


class ConvNd(Module):
    """Convolution over `spatial` axes with "same" padding for stride 1."""

    def __init__(
        self,
        spatial: int,
        in_channels: int,
        out_channels: int,
        kernel: int,
        rng: np.random.Generator,
        stride: int = 1,
        dilation: int = 1,
        bias: bool = True,
    ):
        super().__init__()
        fan_in = in_channels * kernel**spatial
        self.weight = Parameter(
            kaiming(rng, (out_channels, in_channels) + (kernel,) * spatial, fan_in)
        )
        self.bias: Optional[Parameter] = Parameter(np.zeros(out_channels)) if bias else None
        self.stride = stride
        self.dilation = dilation
        self.padding = same_padding(kernel, dilation)

    def forward(self, x: Tensor) -> Tensor:
        return conv_nd(x, self.weight, self.bias, self.stride, self.dilation, self.padding)


class Conv2d(ConvNd):
    def __init__(self, in_channels, out_channels, kernel, rng, stride=1, dilation=1, bias=True):
        super().__init__(2, in_channels, out_channels, kernel, rng, stride, dilation, bias)


class Conv3d(ConvNd):
    def __init__(self, in_channels, out_channels, kernel, rng, stride=1, dilation=1, bias=True):
        super().__init__(3, in_channels, out_channels, kernel, rng, stride, dilation, bias)


class BatchNorm(Module):
    def __init__(self, channels: int, momentum: float = DEFAULT_MOMENTUM, eps: float = DEFAULT_EPS):
        super().__init__()
        self.gamma = Parameter(np.ones(channels))
        self.beta = Parameter(np.zeros(channels))
        self.running = RunningStats.fresh(channels, momentum)
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return batch_norm(x, self.gamma, self.beta, self.running, self.mode, self.eps)


class ConvBnReLU(Module):
    """Bias-free convolution, batch normalization, ReLU."""

    def __init__(
        self,
        spatial: int,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel: int = 3,
        stride: int = 1,
        dilation: int = 1,
        momentum: float = DEFAULT_MOMENTUM,
        eps: float = DEFAULT_EPS,
    ):
        super().__init__()
        self.conv = ConvNd(
            spatial, in_channels, out_channels, kernel, rng, stride, dilation, bias=False
        )
        self.bn = BatchNorm(out_channels, momentum, eps)

    def forward(self, x: Tensor) -> Tensor:
        return F.relu(self.bn(self.conv(x)))


class ConvTransposeBn3d(Module):
    """Stride-2 transposed convolution that doubles each extent, then BN and ReLU."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel: int = 3,
        momentum: float = DEFAULT_MOMENTUM,
        eps: float = DEFAULT_EPS,
    ):
        super().__init__()
        fan_in = in_channels * kernel**3
        self.weight = Parameter(kaiming(rng, (in_channels, out_channels) + (kernel,) * 3, fan_in))
        self.bn = BatchNorm(out_channels, momentum, eps)
        self.padding = same_padding(kernel)

    def forward(self, x: Tensor) -> Tensor:
        up = conv_transpose_nd(
            x, self.weight, None, stride=2, padding=self.padding, output_padding=1
        )
        return F.relu(self.bn(up))
