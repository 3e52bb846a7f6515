"""Plane-sweep warping and the variance cost volume at the reference view."""

import logging
from typing import Sequence, Union

import numpy as np

from src.domain.autodiff import Tensor, sample_bilinear_2d
from src.domain.autodiff import functional as F
from src.domain.autodiff.tensor import as_tensor
from src.domain.model.camera.camera import Camera
from src.domain.model.volume.cost_volume import CostVolume
from src.domain.model.volume.feature_map import FEATURE_STRIDE, FeatureMap
from src.domain.services.geometry import apply_homography, homography_at_depth, pixel_grid
from src.domain.shared_kernel import ShapeMismatchError

logger = logging.getLogger(__name__)

ImageLike = Union[np.ndarray, Tensor]


def image_tensor(image: ImageLike) -> Tensor:
    """Channel-first tensor [3,H,W] from an [H,W,3] array; tensors pass through."""
    if isinstance(image, Tensor):
        return image
    return Tensor(np.transpose(np.asarray(image), (2, 0, 1)))


def box_downsample(image: ImageLike, factor: int = FEATURE_STRIDE) -> Tensor:
    """Average non-overlapping factor×factor blocks of a [C,H,W] image."""
    x = image_tensor(image)
    c, h, w = x.shape
    if h % factor or w % factor:
        raise ShapeMismatchError(f"Image extents must be divisible by {factor}", factor, (h, w))
    blocks = F.reshape(x, (c, h // factor, factor, w // factor, factor))
    return F.mean(blocks, axis=(2, 4))


def feature_cameras(cameras: Sequence[Camera]) -> list[Camera]:
    return [cam.scaled(1.0 / FEATURE_STRIDE) for cam in cameras]


def _warp_coords(ref: Camera, src: Camera, depths: np.ndarray) -> np.ndarray:
    """Source pixel coordinates [D·h·w, 2] of every reference pixel on every plane."""
    grid = pixel_grid(ref.width, ref.height)
    coords = []
    behind = 0
    for z in depths:
        warped, w = apply_homography(homography_at_depth(ref, src, float(z)), grid)
        invalid = w <= 0
        behind += int(invalid.sum())
        warped[invalid] = -1.0
        coords.append(warped)
    if behind:
        logger.debug(f"{behind} warped samples fell behind a source camera and were clamped")
    return np.concatenate(coords, axis=0)


def sweep_warp(
    features: Sequence[Union[FeatureMap, Tensor]],
    cameras: Sequence[Camera],
    depths: Sequence[float],
) -> list[Tensor]:
    """
    Warp every view's map [C,h,w] onto the reference planes.

    `cameras` are at the resolution of the maps. Returns one [C,D,h,w] tensor
    per view; the reference view is broadcast unchanged.
    """
    maps = [f.tensor if isinstance(f, FeatureMap) else as_tensor(f) for f in features]
    if len(maps) < 2 or len(maps) != len(cameras):
        raise ShapeMismatchError(
            "Need one camera per map and at least two views", len(maps), len(cameras)
        )
    depths = np.asarray(depths, dtype=np.float64)
    ref = cameras[0]
    c, h, w = maps[0].shape
    if (h, w) != (ref.height, ref.width):
        raise ShapeMismatchError(
            "Reference map does not match its camera", (ref.height, ref.width), (h, w)
        )
    stacks = []
    for feature_map, cam in zip(maps, cameras):
        if cam.same_pose(ref) and feature_map.shape == maps[0].shape:
            expanded = F.reshape(feature_map, (c, 1, h, w))
            stacks.append(F.broadcast_to(expanded, (c, len(depths), h, w)))
            continue
        sampled = sample_bilinear_2d(feature_map, Tensor.wrap(_warp_coords(ref, cam, depths)))
        shape = (feature_map.shape[0], len(depths), h, w)
        stacks.append(F.reshape(F.transpose(sampled, (1, 0)), shape))
    return stacks


def variance_volume(stacks: Sequence[Tensor]) -> Tensor:
    """Population variance over views of per-view [C,D,h,w] stacks."""
    if len(stacks) < 2:
        raise ShapeMismatchError("Variance needs at least two views", ">= 2", len(stacks))
    return F.variance(F.stack(list(stacks), axis=0), axis=0)


def append_warped_colors(
    images: Sequence[ImageLike],
    cameras: Sequence[Camera],
    depths: Sequence[float],
) -> Tensor:
    """Box-downsampled RGB of every view warped onto the planes, [3·M,D,h,w]."""
    small = [box_downsample(image) for image in images]
    return F.concat(sweep_warp(small, feature_cameras(cameras), depths), axis=0)


def build_cost_volume(
    features: Sequence[Union[FeatureMap, Tensor]],
    images: Sequence[ImageLike],
    cameras: Sequence[Camera],
    depths: Sequence[float],
) -> CostVolume:
    """Variance channels followed by the warped colors of every view."""
    small_cameras = feature_cameras(cameras)
    variance = variance_volume(sweep_warp(features, small_cameras, depths))
    colors = append_warped_colors(images, cameras, depths)
    return CostVolume(
        tensor=F.concat([variance, colors], axis=0),
        depths=np.asarray(depths, dtype=np.float64),
        reference=cameras[0],
        variance_channels=variance.shape[0],
    )
