"""MLP decoding density and view-dependent radiance."""

import numpy as np

from src.domain.autodiff import Module, Tensor
from src.domain.autodiff import functional as F
from src.domain.networks.layers import Linear


def encoded_width(n_freq: int) -> int:
    return 3 + 6 * n_freq


class RadianceMLP(Module):
    """
    h0 = relu(LR0[f, c]); h1 = relu(LR1(PE(x)));
    h_{i+1} = relu(LR_{i+1}(h_i + h0)) for five hidden layers;
    σ = softplus(head(h6)); rgb = sigmoid(head(relu(LR7[PE(d), h6]))).
    """

    def __init__(
        self,
        rng: np.random.Generator,
        feature_channels: int = 32,
        color_channels: int = 9,
        width: int = 256,
        hidden_layers: int = 5,
        position_freqs: int = 10,
        direction_freqs: int = 4,
    ):
        super().__init__()
        self.embed = Linear(feature_channels + color_channels, width, rng)
        self.position = Linear(encoded_width(position_freqs), width, rng)
        self.hidden = [Linear(width, width, rng) for _ in range(hidden_layers)]
        self.sigma_head = Linear(width, 1, rng)
        self.view = Linear(encoded_width(direction_freqs) + width, width, rng)
        self.color_head = Linear(width, 3, rng)
        self.feature_channels = feature_channels
        self.color_channels = color_channels
        self.position_freqs = position_freqs
        self.direction_freqs = direction_freqs

    def forward(self, pe_x: np.ndarray, pe_d: np.ndarray, f: Tensor, c: Tensor):
        """Return (sigma [K], rgb [K,3]) for encoded positions and directions."""
        h0 = F.relu(self.embed(F.concat([f, c], axis=1)))
        h = F.relu(self.position(pe_x))
        for layer in self.hidden:
            h = F.relu(layer(F.add(h, h0)))
        sigma = F.softplus(F.reshape(self.sigma_head(h), (-1,)))
        v = F.relu(self.view(F.concat([pe_d, h], axis=1)))
        rgb = F.sigmoid(self.color_head(v))
        return sigma, rgb
