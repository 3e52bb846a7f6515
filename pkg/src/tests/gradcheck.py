"""Central-difference gradient checks for the autodiff tests."""

from typing import Callable

import numpy as np

from src.domain.autodiff import Tensor, backward, no_grad


def check_gradients(
    fn: Callable[..., Tensor],
    *arrays: np.ndarray,
    eps: float = 1e-6,
    rtol: float = 1e-5,
    atol: float = 1e-7,
) -> None:
    """Compare backward gradients of the scalar `fn(*tensors)` with finite differences."""
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    tensors = [Tensor(a, requires_grad=True) for a in arrays]
    backward(fn(*tensors))

    def value(inputs: list[np.ndarray]) -> float:
        with no_grad():
            return fn(*[Tensor(a) for a in inputs]).item()

    for i, array in enumerate(arrays):
        numeric = np.zeros_like(array)
        for idx in np.ndindex(array.shape):
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[i][idx] += eps
            minus[i][idx] -= eps
            numeric[idx] = (value(plus) - value(minus)) / (2.0 * eps)
        analytic = tensors[i].grad if tensors[i].grad is not None else np.zeros_like(array)
        np.testing.assert_allclose(analytic, numeric, rtol=rtol, atol=atol)
