"""3D UNet turning a cost volume into a neural encoding volume."""

import numpy as np

from src.domain.autodiff import Module, Tensor
from src.domain.autodiff import functional as F
from src.domain.autodiff.normalization import DEFAULT_EPS, DEFAULT_MOMENTUM
from src.domain.networks.layers import Conv3d, ConvBnReLU, ConvTransposeBn3d
from src.domain.shared_kernel import ShapeMismatchError

DOWNSAMPLE_FACTOR = 8


class EncodingUNet(Module):
    """
    Three stride-2 levels down to 64 channels and three transposed levels
    back up, with additive skips. A final linear 3×3×3 convolution projects
    the 8 full-resolution channels to the encoding width.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        in_channels: int = 41,
        out_channels: int = 32,
        momentum: float = DEFAULT_MOMENTUM,
        eps: float = DEFAULT_EPS,
    ):
        super().__init__()

        def cbr(ci, co, stride=1):
            return ConvBnReLU(3, ci, co, rng, kernel=3, stride=stride, momentum=momentum, eps=eps)

        self.conv0 = cbr(in_channels, 8)
        self.conv1 = cbr(8, 16, stride=2)
        self.conv2 = cbr(16, 16)
        self.conv3 = cbr(16, 32, stride=2)
        self.conv4 = cbr(32, 32)
        self.conv5 = cbr(32, 64, stride=2)
        self.conv6 = cbr(64, 64)
        self.up0 = ConvTransposeBn3d(64, 32, rng, momentum=momentum, eps=eps)
        self.up1 = ConvTransposeBn3d(32, 16, rng, momentum=momentum, eps=eps)
        self.up2 = ConvTransposeBn3d(16, 8, rng, momentum=momentum, eps=eps)
        self.head = Conv3d(8, out_channels, 3, rng)
        self.in_channels = in_channels
        self.out_channels = out_channels

    def check_input(self, shape: tuple[int, ...]) -> None:
        if len(shape) != 5 or shape[1] != self.in_channels:
            raise ShapeMismatchError(
                "Encoding input must be [N, cost channels, D, H, W]",
                ("N", self.in_channels, "D", "H", "W"),
                shape,
            )
        if any(n % DOWNSAMPLE_FACTOR for n in shape[2:]):
            raise ShapeMismatchError(
                f"Volume extents must be divisible by {DOWNSAMPLE_FACTOR}",
                "multiples of 8",
                shape[2:],
            )

    def forward(self, cost: Tensor) -> Tensor:
        self.check_input(cost.shape)
        c0 = self.conv0(cost)
        c2 = self.conv2(self.conv1(c0))
        c4 = self.conv4(self.conv3(c2))
        x = self.conv6(self.conv5(c4))
        x = F.add(c4, self.up0(x))
        x = F.add(c2, self.up1(x))
        x = F.add(c0, self.up2(x))
        return self.head(x)

    def shape_walk(self, input_shape: tuple[int, ...]) -> list[tuple[str, tuple]]:
        self.check_input(input_shape)
        n, _, d, h, w = input_shape
        walk = []
        widths = (8, 16, 16, 32, 32, 64, 64)
        scale = 1
        for i, co in enumerate(widths):
            if i in (1, 3, 5):
                scale *= 2
            walk.append((f"CBR3D_{i}", (n, co, d // scale, h // scale, w // scale)))
        for i, co in enumerate((32, 16, 8)):
            scale //= 2
            walk.append((f"CTB3D_{i}", (n, co, d // scale, h // scale, w // scale)))
        walk.append(("CTB3D_3", (n, self.out_channels, d, h, w)))
        return walk
