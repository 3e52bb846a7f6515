"""Point queries and per-ray sample plans for the radiance field."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.domain.autodiff import Tensor
from src.domain.model.camera.camera import NdcPoint
from src.domain.shared_kernel import ShapeMismatchError, ValueObject


@dataclass(frozen=True, eq=False)
class PointQuery(ValueObject):
    """Inputs of the radiance MLP for K points: position, direction, feature, colors."""

    x: NdcPoint
    d: np.ndarray
    f: Tensor
    c: Tensor

    def __post_init__(self) -> None:
        k = len(self.x)
        if self.d.shape != (k, 3) or self.f.shape[0] != k or self.c.shape[0] != k:
            raise ShapeMismatchError(
                "Query components must describe the same points",
                k,
                (self.d.shape, self.f.shape, self.c.shape),
            )

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True, eq=False)
class VolumeSample(ValueObject):
    """Density per unit NDC depth and RGB radiance for K points."""

    sigma: Tensor
    radiance: Tensor


@dataclass(frozen=True, eq=False)
class RaySamplePlan(ValueObject):
    """
    Stratified samples along R rays, n per ray.

    `zn` are NDC depths, `deltas` the NDC stratum widths, `distances` the
    parameter along each ray and `points` the reference-frame positions.
    Rays that miss the depth slab are flagged in `empty`; their deltas are 0.
    """

    zn: np.ndarray
    deltas: np.ndarray
    distances: np.ndarray
    points: np.ndarray
    empty: np.ndarray
    seed: Optional[int] = None

    @property
    def n_rays(self) -> int:
        return self.zn.shape[0]

    @property
    def n_samples(self) -> int:
        return self.zn.shape[1]
