"""Radiance field that decodes encoding-volume features at query points."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.domain.model.camera.camera import Camera, NdcPoint
from src.domain.model.enums import DepthParameterization
from src.domain.model.field.samples import PointQuery, VolumeSample
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.networks.radiance_mlp import RadianceMLP
from src.domain.services.encoding import query
from src.domain.services.radiance_field import decode, gather_view_colors
from src.domain.shared_kernel import FinetuneStateError


@dataclass
class NeuralField:
    """
    Radiance field backed by an encoding volume and the MLP.

    Per-point colors come from the volume's appended channels when present,
    otherwise from the held input images.
    """

    volume: EncodingVolume
    mlp: RadianceMLP
    images: Optional[Sequence[np.ndarray]] = None
    cameras: Optional[Sequence[Camera]] = None
    parameterization: DepthParameterization = DepthParameterization.LINEAR
    include_pi: bool = False

    def __post_init__(self) -> None:
        if not self.volume.has_colors and (self.images is None or self.cameras is None):
            raise FinetuneStateError("A volume without appended colors needs the input images")

    @property
    def reference(self) -> Camera:
        return self.volume.reference

    def evaluate(self, ndc: np.ndarray, directions: np.ndarray) -> VolumeSample:
        """Density and radiance at NDC points [K,3] seen along reference-frame directions."""
        features, colors = query(self.volume, ndc)
        if colors is None:
            colors, _ = gather_view_colors(ndc, self.images, self.cameras, self.parameterization)
        point = PointQuery(x=NdcPoint.from_array(ndc), d=directions, f=features, c=colors)
        return decode(point, self.mlp, self.include_pi)
