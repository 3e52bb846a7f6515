from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.domain.autodiff import Tensor
from src.domain.model.camera.camera import Camera
from src.domain.model.volume.feature_map import FEATURE_STRIDE
from src.domain.shared_kernel import ShapeMismatchError, ValueObject


@dataclass(frozen=True, eq=False)
class EncodingVolume(ValueObject):
    """
    Neural feature grid over the reference frustum.

    Voxel (k, j, i) of the unpadded grid sits at depth plane k and reference
    feature pixel (i, j). `margins` counts padding voxels on each side of the
    (D, H, W) axes; the mapping from NDC keeps the original voxels fixed.
    """

    features: Tensor
    reference: Camera
    appended_colors: Optional[Tensor] = None
    margins: tuple[int, int, int] = (0, 0, 0)
    feature_scale: float = 1.0 / FEATURE_STRIDE

    def __post_init__(self) -> None:
        if self.features.ndim != 4:
            raise ShapeMismatchError("Encoding features must be [C,D,H,W]", 4, self.features.ndim)
        margins = tuple(int(m) for m in self.margins)
        if len(margins) != 3 or min(margins) < 0:
            raise ShapeMismatchError("Margins must be three non-negative counts", 3, margins)
        object.__setattr__(self, "margins", margins)
        if self.appended_colors is not None:
            if self.appended_colors.shape[1:] != self.features.shape[1:]:
                raise ShapeMismatchError(
                    "Appended colors must share the feature grid",
                    self.features.shape[1:],
                    self.appended_colors.shape[1:],
                )
        if any(n - 2 * m < 1 for n, m in zip(self.features.shape[1:], margins)):
            raise ShapeMismatchError("Margins exceed the grid", self.features.shape[1:], margins)

    @property
    def channels(self) -> int:
        return self.features.shape[0]

    @property
    def spatial_shape(self) -> tuple[int, int, int]:
        return tuple(self.features.shape[1:])

    @property
    def base_shape(self) -> tuple[int, int, int]:
        return tuple(n - 2 * m for n, m in zip(self.spatial_shape, self.margins))

    @property
    def has_colors(self) -> bool:
        return self.appended_colors is not None

    def voxel_coords(self, ndc: np.ndarray) -> np.ndarray:
        """Continuous (z, y, x) voxel indices in the padded grid for NDC rows [K,3]."""
        ndc = np.asarray(ndc, dtype=np.float64)
        mz, my, mx = self.margins
        x = ndc[:, 0] * (self.reference.width - 1) * self.feature_scale + mx
        y = ndc[:, 1] * (self.reference.height - 1) * self.feature_scale + my
        z = ndc[:, 2] * (self.base_shape[0] - 1) + mz
        return np.stack([z, y, x], axis=-1)

    def normalized_coords(self, ndc: np.ndarray) -> np.ndarray:
        """Normalized (u, v, w) sampling coordinates for NDC rows [K,3]."""
        z, y, x = self.voxel_coords(ndc).T
        d, h, w = (max(n - 1, 1) for n in self.spatial_shape)
        return np.stack([x / w, y / h, z / d], axis=-1)

    def voxel_centers_ndc(self) -> np.ndarray:
        """NDC coordinates of every voxel of the padded grid, in C order over (D, H, W)."""
        d, h, w = self.spatial_shape
        mz, my, mx = self.margins
        k, j, i = np.meshgrid(np.arange(d), np.arange(h), np.arange(w), indexing="ij")
        u = (i.ravel() - mx) / (self.feature_scale * (self.reference.width - 1))
        v = (j.ravel() - my) / (self.feature_scale * (self.reference.height - 1))
        zn = (k.ravel() - mz) / max(self.base_shape[0] - 1, 1)
        return np.stack([u, v, zn], axis=-1)

    def with_tensors(
        self,
        features: Tensor,
        appended_colors: Optional[Tensor] = None,
        margins: Optional[tuple[int, int, int]] = None,
    ) -> "EncodingVolume":
        return replace(
            self,
            features=features,
            appended_colors=appended_colors,
            margins=self.margins if margins is None else margins,
        )
