"""2D CNN mapping images to quarter-resolution feature maps."""

import numpy as np

from src.domain.autodiff import Module, Tensor
from src.domain.autodiff.conv import output_extent, same_padding
from src.domain.autodiff.normalization import DEFAULT_EPS, DEFAULT_MOMENTUM
from src.domain.networks.layers import Conv2d, ConvBnReLU

# (in, out, kernel, stride, dilation) of the ConvBnReLU stack.
FEATURE_LAYERS = (
    (3, 8, 3, 1, 1),
    (8, 8, 3, 1, 1),
    (8, 16, 5, 2, 2),
    (16, 16, 3, 1, 1),
    (16, 16, 3, 1, 1),
    (16, 32, 5, 2, 2),
    (32, 32, 3, 1, 1),
)


class FeatureExtractor(Module):
    """Seven ConvBnReLU layers followed by a linear 3×3 projection."""

    def __init__(
        self,
        rng: np.random.Generator,
        out_channels: int = 32,
        momentum: float = DEFAULT_MOMENTUM,
        eps: float = DEFAULT_EPS,
    ):
        super().__init__()
        self.layers = [
            ConvBnReLU(2, ci, co, rng, k, s, d, momentum, eps)
            for ci, co, k, s, d in FEATURE_LAYERS
        ]
        self.top = Conv2d(FEATURE_LAYERS[-1][1], out_channels, 3, rng)
        self.out_channels = out_channels

    def forward(self, images: Tensor) -> Tensor:
        x = images
        for layer in self.layers:
            x = layer(x)
        return self.top(x)

    def shape_walk(self, input_shape: tuple[int, int, int, int]) -> list[tuple[str, tuple]]:
        """Output shape of every layer for an [N,3,H,W] input, without computing."""
        n, _, h, w = input_shape
        walk = []
        for i, (_, co, k, s, d) in enumerate(FEATURE_LAYERS):
            pad = same_padding(k, d)
            h, w = output_extent(h, k, s, d, pad), output_extent(w, k, s, d, pad)
            walk.append((f"CBR2D_{i}", (n, co, h, w)))
        walk.append(("T", (n, self.out_channels, h, w)))
        return walk
