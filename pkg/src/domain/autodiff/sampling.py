"""
Multilinear grid sampling with border clamping.

Gradients flow to the sampled values and to the query coordinates. A
coordinate that was clamped to the border receives zero gradient.
"""

import itertools

import numpy as np

from src.domain.autodiff import functional as F
from src.domain.autodiff.tensor import Tensor, as_tensor, make_result
from src.domain.shared_kernel import ShapeMismatchError


def sample_grid(values: Tensor, coords: Tensor) -> Tensor:
    """
    Interpolate values [C,*S] at coords [K,n] given in index units of the S axes.

    Returns [K,C]. Coordinates are clamped to [0, S_i − 1] per axis.
    """
    values, coords = as_tensor(values), as_tensor(coords)
    extents = values.shape[1:]
    nd = len(extents)
    if coords.ndim != 2 or coords.shape[1] != nd:
        raise ShapeMismatchError("Coordinates must be [K, spatial rank]", nd, coords.shape)
    upper = np.array(extents, dtype=coords.dtype) - 1
    clamped = np.clip(coords.data, 0, upper)
    inside = (coords.data >= 0) & (coords.data <= upper)
    base = np.floor(clamped).astype(np.int64)
    base = np.minimum(base, np.maximum(np.array(extents) - 2, 0))
    frac = clamped - base
    channels = values.shape[0]
    flat_values = values.data.reshape(channels, -1)

    corners = []
    out = np.zeros((coords.shape[0], channels), dtype=values.dtype)
    for bits in itertools.product((0, 1), repeat=nd):
        idx = np.minimum(base + np.array(bits), np.array(extents) - 1)
        flat = np.ravel_multi_index(tuple(idx.T), extents)
        factors = np.where(np.array(bits, dtype=bool), frac, 1.0 - frac)
        weight = factors.prod(axis=1)
        gathered = flat_values[:, flat].T
        out += weight[:, None] * gathered
        corners.append((bits, flat, factors, weight, gathered))

    def backward(g):
        gv = np.zeros_like(flat_values)
        gc = np.zeros_like(coords.data)
        for bits, flat, factors, weight, gathered in corners:
            np.add.at(gv, (slice(None), flat), (g * weight[:, None]).T)
            projected = (g * gathered).sum(axis=1)
            for axis in range(nd):
                others = np.delete(factors, axis, axis=1).prod(axis=1)
                sign = 1.0 if bits[axis] else -1.0
                gc[:, axis] += sign * others * projected
        return gv.reshape(values.shape), gc * inside

    return make_result(f"sample_{nd}d", out, (values, coords), backward)


def sample_bilinear_2d(feature_map: Tensor, coords: Tensor) -> Tensor:
    """
    Bilinear lookup of map [C,H,W] at coords [K,2] given as (x=column, y=row) pixels.

    Integer coordinates land exactly on pixel centers.
    """
    feature_map, coords = as_tensor(feature_map), as_tensor(coords)
    if feature_map.ndim != 3:
        raise ShapeMismatchError("sample_bilinear_2d expects [C,H,W]", 3, feature_map.ndim)
    row_col = F.index(coords, (slice(None), [1, 0]))
    return sample_grid(feature_map, row_col)


def sample_trilinear_3d(volume: Tensor, coords: Tensor) -> Tensor:
    """
    Trilinear lookup of volume [C,D,H,W] at coords [K,3] given as normalized (u, v, w).

    u spans the W axis, v the H axis and w the D axis; 0 and 1 are the first
    and last voxel centers.
    """
    volume, coords = as_tensor(volume), as_tensor(coords)
    if volume.ndim != 4:
        raise ShapeMismatchError("sample_trilinear_3d expects [C,D,H,W]", 4, volume.ndim)
    _, depth, height, width = volume.shape
    scale = np.array([depth - 1, height - 1, width - 1], dtype=volume.dtype)
    voxel = F.mul(F.index(coords, (slice(None), [2, 1, 0])), scale)
    return sample_grid(volume, voxel)
