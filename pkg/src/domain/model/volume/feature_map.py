from dataclasses import dataclass

from src.domain.autodiff import Tensor
from src.domain.shared_kernel import ShapeMismatchError, ValueObject

FEATURE_STRIDE = 4


@dataclass(frozen=True, eq=False)
class FeatureMap(ValueObject):
    """Quarter-resolution features of one input view."""

    view_index: int
    tensor: Tensor
    image_height: int
    image_width: int

    def __post_init__(self) -> None:
        expected = (self.image_height // FEATURE_STRIDE, self.image_width // FEATURE_STRIDE)
        if self.tensor.ndim != 3 or self.tensor.shape[1:] != expected:
            raise ShapeMismatchError(
                f"Feature map of view {self.view_index} has the wrong extents",
                ("C",) + expected,
                self.tensor.shape,
            )

    @property
    def channels(self) -> int:
        return self.tensor.shape[0]
