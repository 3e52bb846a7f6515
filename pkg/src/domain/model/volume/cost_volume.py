from dataclasses import dataclass

import numpy as np

from src.domain.autodiff import Tensor
from src.domain.model.camera.camera import Camera
from src.domain.shared_kernel import ShapeMismatchError, ValueObject


@dataclass(frozen=True, eq=False)
class CostVolume(ValueObject):
    """
    Plane-sweep volume at the reference view.

    `tensor` is [variance channels + 3·views, D, H/4, W/4]; the color channels
    hold each view's warped RGB, reference view first.
    """

    tensor: Tensor
    depths: np.ndarray
    reference: Camera
    variance_channels: int

    def __post_init__(self) -> None:
        depths = np.asarray(self.depths, dtype=np.float64)
        object.__setattr__(self, "depths", depths)
        if self.tensor.ndim != 4 or self.tensor.shape[1] != depths.shape[0]:
            raise ShapeMismatchError(
                "Cost volume depth axis must match the depth list",
                depths.shape[0],
                self.tensor.shape,
            )
        if depths.shape[0] < 2 or np.any(np.diff(depths) <= 0):
            raise ShapeMismatchError("Depth hypotheses must be strictly increasing")

    @property
    def channels(self) -> int:
        return self.tensor.shape[0]

    @property
    def spatial_shape(self) -> tuple[int, int, int]:
        return tuple(self.tensor.shape[1:])
