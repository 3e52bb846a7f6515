"""Positional encoding, per-view color gathering and MLP decoding."""

from typing import Sequence, Union

import numpy as np

from src.domain.autodiff import Tensor, sample_bilinear_2d
from src.domain.autodiff import functional as F
from src.domain.model.camera.camera import Camera, NdcPoint
from src.domain.model.enums import DepthParameterization
from src.domain.model.field.samples import PointQuery, VolumeSample
from src.domain.networks.radiance_mlp import RadianceMLP
from src.domain.services.geometry import ndc_inverse, project_to_view, ref_to_world
from src.domain.services.plane_sweep import image_tensor


def positional_encode(v: np.ndarray, n_freq: int, include_pi: bool = False) -> np.ndarray:
    """
    [v, sin(2^0·v) … sin(2^(n−1)·v), cos(2^0·v) … cos(2^(n−1)·v)] per row.

    Rows of [K,3] become [K, 3 + 6·n_freq]; `include_pi` multiplies every
    frequency by π.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    scales = 2.0 ** np.arange(n_freq)
    if include_pi:
        scales = scales * np.pi
    angles = (v[:, None, :] * scales[None, :, None]).reshape(len(v), -1)
    return np.concatenate([v, np.sin(angles), np.cos(angles)], axis=1)


def gather_view_colors(
    ndc: Union[NdcPoint, np.ndarray],
    images: Sequence[np.ndarray],
    cameras: Sequence[Camera],
    parameterization: Union[DepthParameterization, str] = DepthParameterization.LINEAR,
) -> tuple[Tensor, np.ndarray]:
    """
    Colors [K,3·M] of NDC points seen by every view, reference view first.

    Returns the colors and a [K,M] mask of projections from behind a camera;
    those samples are clamped to the image border.
    """
    array = ndc.as_array() if isinstance(ndc, NdcPoint) else np.atleast_2d(ndc)
    ref = cameras[0]
    world = ref_to_world(ref, ndc_inverse(ref, array, parameterization))
    colors, behind = [], []
    for image, cam in zip(images, cameras):
        u, v, _, in_front = project_to_view(cam, world)
        coords = np.stack([u, v], axis=-1)
        coords[~in_front] = -1.0
        colors.append(sample_bilinear_2d(image_tensor(image), Tensor.wrap(coords)))
        behind.append(~in_front)
    return F.concat(colors, axis=1), np.stack(behind, axis=1)


def decode(q: PointQuery, mlp: RadianceMLP, include_pi: bool = False) -> VolumeSample:
    """Density and radiance of every queried point."""
    pe_x = positional_encode(q.x.as_array(), mlp.position_freqs, include_pi)
    pe_d = positional_encode(q.d, mlp.direction_freqs, include_pi)
    sigma, rgb = mlp(pe_x, pe_d, q.f, q.c)
    return VolumeSample(sigma=sigma, radiance=rgb)

