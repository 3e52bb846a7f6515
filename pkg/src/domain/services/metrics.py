"""Image and depth quality metrics."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from skimage.metrics import structural_similarity

from src.domain.shared_kernel import MetricError

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
DEPTH_THRESHOLDS = (0.01, 0.05)


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise MetricError(f"Image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10·log10(1 / MSE) for images in [0,1], capped at 99 dB."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse <= 10.0 ** (-PSNR_CAP_DB / 10.0):
        return PSNR_CAP_DB
    return float(10.0 * np.log10(1.0 / mse))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """
    Mean local SSIM of the channel-mean grayscale images, with an 11×11
    Gaussian window (σ = 1.5), K1 = 0.01, K2 = 0.03 and unit dynamic range.
    """
    a, b = _check_pair(a, b)
    if a.ndim == 3:
        a, b = a.mean(axis=2), b.mean(axis=2)
    if min(a.shape) < SSIM_WINDOW:
        raise MetricError(f"Images of size {a.shape} are smaller than the {SSIM_WINDOW}px window")
    return float(
        structural_similarity(
            a,
            b,
            data_range=1.0,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            use_sample_covariance=False,
            K1=0.01,
            K2=0.03,
        )
    )


@dataclass(frozen=True)
class DepthMetrics:
    abs_err: Optional[float]
    acc_01: Optional[float]
    acc_05: Optional[float]
    count: int

    @property
    def applicable(self) -> bool:
        return self.count > 0


def depth_metrics(pred: np.ndarray, truth: np.ndarray, mask: np.ndarray) -> DepthMetrics:
    """
    Mean absolute depth error over the mask and the fraction of masked pixels
    within 0.01 and 0.05 scene units. An empty mask yields a not-applicable result.
    """
    pred, truth = _check_pair(pred, truth)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != pred.shape:
        raise MetricError(f"Mask shape {mask.shape} does not match depth shape {pred.shape}")
    count = int(mask.sum())
    if count == 0:
        return DepthMetrics(abs_err=None, acc_01=None, acc_05=None, count=0)
    err = np.abs(pred[mask] - truth[mask])
    return DepthMetrics(
        abs_err=float(err.mean()),
        acc_01=float((err < DEPTH_THRESHOLDS[0]).mean()),
        acc_05=float((err < DEPTH_THRESHOLDS[1]).mean()),
        count=count,
    )
