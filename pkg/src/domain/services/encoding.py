"""Encoding-volume construction, querying, color appending and padding."""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from src.domain.autodiff import Tensor, sample_trilinear_3d
from src.domain.autodiff import functional as F
from src.domain.model.camera.camera import Camera, NdcPoint
from src.domain.model.enums import DepthParameterization
from src.domain.model.volume.cost_volume import CostVolume
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.networks.encoding_net import DOWNSAMPLE_FACTOR, EncodingUNet
from src.domain.services.radiance_field import gather_view_colors
from src.domain.shared_kernel import FinetuneStateError, ShapeMismatchError

logger = logging.getLogger(__name__)


def encode(cost: CostVolume, net: EncodingUNet) -> EncodingVolume:
    """Run the UNet on a cost volume whose extents are multiples of 8."""
    c, d, h, w = cost.tensor.shape
    out = net(F.reshape(cost.tensor, (1, c, d, h, w)))
    return EncodingVolume(
        features=F.reshape(out, (net.out_channels, d, h, w)), reference=cost.reference
    )


def encode_aligned(
    cost: CostVolume, net: EncodingUNet, multiple: int = DOWNSAMPLE_FACTOR
) -> EncodingVolume:
    """
    Encode a cost volume of any extent by edge-padding it up to the next
    multiple of `multiple` and cropping the result back.
    """
    c, d, h, w = cost.tensor.shape
    extra = [(-n) % multiple for n in (d, h, w)]
    if not any(extra):
        return encode(cost, net)
    logger.debug(f"Padding cost volume {(d, h, w)} by {extra} for the encoder")
    padded = F.pad_edge(cost.tensor, [(0, 0)] + [(0, e) for e in extra])
    out = net(F.reshape(padded, (1,) + padded.shape))
    cropped = F.index(out, (0, slice(None), slice(0, d), slice(0, h), slice(0, w)))
    return EncodingVolume(features=cropped, reference=cost.reference)


def query(
    volume: EncodingVolume, ndc: Union[NdcPoint, np.ndarray]
) -> tuple[Tensor, Optional[Tensor]]:
    """
    Trilinear features [K,C] at NDC points, plus appended colors [K,9] when the
    volume carries them.
    """
    array = ndc.as_array() if isinstance(ndc, NdcPoint) else np.atleast_2d(ndc)
    coords = Tensor.wrap(volume.normalized_coords(array))
    features = sample_trilinear_3d(volume.features, coords)
    colors = None
    if volume.appended_colors is not None:
        colors = sample_trilinear_3d(volume.appended_colors, coords)
    return features, colors


def append_voxel_colors(
    volume: EncodingVolume,
    images: Sequence[np.ndarray],
    cameras: Sequence[Camera],
    parameterization: Union[DepthParameterization, str] = DepthParameterization.LINEAR,
) -> EncodingVolume:
    """
    Store every view's color at every voxel center as extra channels, so the
    volume renders without the input images afterwards.
    """
    if volume.has_colors:
        raise FinetuneStateError("Voxel colors were already appended to this volume")
    ndc = volume.voxel_centers_ndc()
    colors, behind = gather_view_colors(ndc, images, cameras, parameterization)
    if behind.any():
        logger.info(f"{int(behind.sum())} voxel projections fell behind a camera; colors clamped")
    d, h, w = volume.spatial_shape
    grid = np.ascontiguousarray(colors.data.T.reshape(colors.shape[1], d, h, w))
    return volume.with_tensors(volume.features, Tensor(grid))


def pad_volume(volume: EncodingVolume, margin: Union[int, Sequence[int]]) -> EncodingVolume:
    """Grow the grid by edge replication, keeping original voxels at their NDC positions."""
    margins = (margin,) * 3 if isinstance(margin, int) else tuple(margin)
    if len(margins) != 3 or min(margins) < 0:
        raise ShapeMismatchError("Padding margin must be non-negative", 3, margins)
    if not any(margins):
        return volume
    widths = [(0, 0)] + [(m, m) for m in margins]
    features = F.pad_edge(volume.features, widths)
    colors = None
    if volume.appended_colors is not None:
        colors = F.pad_edge(volume.appended_colors, widths)
    total = tuple(a + b for a, b in zip(volume.margins, margins))
    return volume.with_tensors(features, colors, total)
