"""Photometric loss between rendered and observed ray colors."""

import numpy as np

from src.domain.autodiff import Tensor
from src.domain.autodiff import functional as F
from src.domain.autodiff.tensor import as_tensor
from src.domain.shared_kernel import ShapeMismatchError


def rendering_loss(predicted: Tensor, truth) -> Tensor:
    """Mean squared error over every color component of a ray batch."""
    predicted = as_tensor(predicted)
    truth = np.asarray(truth.data if isinstance(truth, Tensor) else truth, dtype=predicted.dtype)
    if predicted.shape != truth.shape:
        raise ShapeMismatchError(
            "Predicted and true colors differ in shape", truth.shape, predicted.shape
        )
    residual = F.sub(predicted, truth)
    return F.mean(F.mul(residual, residual))
