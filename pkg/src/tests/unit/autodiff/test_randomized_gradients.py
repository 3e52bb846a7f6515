"""
Randomized gradient checks: every differentiable operation against central
differences on many small random inputs.
"""

import numpy as np
import pytest

from src.domain.autodiff import (
    RunningStats,
    batch_norm,
    conv2d,
    conv3d,
    conv_transpose3d,
    sample_bilinear_2d,
    sample_trilinear_3d,
)
from src.domain.autodiff import functional as F
from src.domain.autodiff.conv import same_padding
from src.tests.gradcheck import check_gradients

CASES = range(100)


def projection(out, rng: np.random.Generator):
    return F.sum(F.mul(out, rng.uniform(-1.0, 1.0, size=out.shape)))


def random_shape(rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(n) for n in rng.integers(1, 4, size=rng.integers(1, 4)))


def away_from_zero(rng: np.random.Generator, shape) -> np.ndarray:
    """Values with |x| ≥ 0.1, clear of the ReLU kink and of zero denominators."""
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(0.1, 2.0, size=shape)


@pytest.mark.unit
class TestRandomizedPointwise:
    """Unary and broadcasting binary operations."""

    @pytest.mark.parametrize("case", CASES)
    def test_unary(self, case):
        rng = np.random.default_rng(case)
        fn = ["relu", "softplus", "sigmoid", "exp", "neg"][case % 5]
        x = away_from_zero(rng, random_shape(rng))

        check_gradients(lambda t: projection(F.elementwise(t, fn), np.random.default_rng(case)), x)

    @pytest.mark.parametrize("case", CASES)
    def test_binary_with_broadcasting(self, case):
        rng = np.random.default_rng(1000 + case)
        fn = ["add", "sub", "mul", "div"][case % 4]
        shape = random_shape(rng)
        other = tuple(1 if rng.uniform() < 0.4 else n for n in shape)
        a = away_from_zero(rng, shape)
        b = away_from_zero(rng, other[int(rng.integers(len(other))):])

        check_gradients(
            lambda x, y: projection(F.elementwise(x, fn, y), np.random.default_rng(case)), a, b
        )


@pytest.mark.unit
class TestRandomizedConvolutions:
    """Dense and transposed convolutions with random settings."""

    @pytest.mark.parametrize("case", CASES)
    def test_conv2d(self, case):
        rng = np.random.default_rng(2000 + case)
        stride, dilation = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        x = rng.normal(size=(1, int(rng.integers(1, 3)), 4, 5))
        k = rng.normal(size=(int(rng.integers(1, 3)), x.shape[1], 3, 3))
        b = rng.normal(size=k.shape[0])
        padding = same_padding(3, dilation)

        check_gradients(
            lambda xx, kk, bb: projection(
                conv2d(xx, kk, bb, stride=stride, dilation=dilation, padding=padding),
                np.random.default_rng(case),
            ),
            x,
            k,
            b,
        )

    @pytest.mark.parametrize("case", CASES)
    def test_conv3d(self, case):
        rng = np.random.default_rng(3000 + case)
        stride = int(rng.integers(1, 3))
        x = rng.normal(size=(1, 1, 3, 3, 3))
        k = rng.normal(size=(int(rng.integers(1, 3)), 1, 2, 2, 2))

        check_gradients(
            lambda xx, kk: projection(
                conv3d(xx, kk, stride=stride, padding=1), np.random.default_rng(case)
            ),
            x,
            k,
        )

    @pytest.mark.parametrize("case", CASES)
    def test_conv_transpose3d(self, case):
        rng = np.random.default_rng(4000 + case)
        x = rng.normal(size=(1, int(rng.integers(1, 3)), 2, 1, 2))
        k = rng.normal(size=(x.shape[1], 1, 3, 3, 3))
        b = rng.normal(size=1)

        check_gradients(
            lambda xx, kk, bb: projection(
                conv_transpose3d(xx, kk, bb), np.random.default_rng(case)
            ),
            x,
            k,
            b,
        )


@pytest.mark.unit
class TestRandomizedNormalizationAndSampling:
    """Batch normalization in both modes and grid sampling."""

    @pytest.mark.parametrize("case", CASES)
    def test_batch_norm(self, case):
        rng = np.random.default_rng(5000 + case)
        mode = "train" if case % 2 == 0 else "eval"
        channels = int(rng.integers(1, 3))
        x = rng.normal(size=(2, channels, int(rng.integers(2, 4))))
        gamma = rng.uniform(0.5, 1.5, size=channels)
        beta = rng.normal(size=channels)

        check_gradients(
            lambda xx, gg, bb: projection(
                batch_norm(xx, gg, bb, RunningStats.fresh(channels), mode),
                np.random.default_rng(case),
            ),
            x,
            gamma,
            beta,
            rtol=1e-4,
            atol=1e-6,
        )

    @pytest.mark.parametrize("case", CASES)
    def test_bilinear(self, case):
        rng = np.random.default_rng(6000 + case)
        image = rng.normal(size=(int(rng.integers(1, 3)), 3, 4))
        coords = np.column_stack(
            [rng.uniform(0.05, 2.95, size=3), rng.uniform(0.05, 1.95, size=3)]
        )
        # Keep clear of the cell edges where the interpolant has kinks.
        coords = np.where(np.abs(coords - np.round(coords)) < 0.02, coords + 0.04, coords)

        check_gradients(
            lambda v, c: projection(sample_bilinear_2d(v, c), np.random.default_rng(case)),
            image,
            coords,
            rtol=1e-4,
        )

    @pytest.mark.parametrize("case", CASES)
    def test_trilinear(self, case):
        rng = np.random.default_rng(7000 + case)
        volume = rng.normal(size=(1, 2, 3, 3))
        # Normalized coordinates away from the voxel-center lattice.
        cells = rng.integers(0, 2, size=(2, 3)).astype(np.float64)
        fraction = rng.uniform(0.1, 0.9, size=(2, 3))
        extents = np.array([2.0, 2.0, 1.0])
        coords = (cells + fraction) / extents
        coords[:, 2] = np.clip(coords[:, 2], 0.1, 0.9)

        check_gradients(
            lambda v, c: projection(sample_trilinear_3d(v, c), np.random.default_rng(case)),
            volume,
            coords,
            rtol=1e-4,
        )
