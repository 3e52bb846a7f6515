"""
Coordinate conventions of the reference frustum.

All functions are pure and operate in float64. Points in the "reference
frame" are reference-camera coordinates: x right, y down, z along the
optical axis.
"""

import logging
from typing import Union

import numpy as np

from src.domain.model.camera.camera import Camera, NdcPoint, RayBatch
from src.domain.model.enums import DepthParameterization
from src.domain.shared_kernel import CameraError

logger = logging.getLogger(__name__)

Parameterization = Union[DepthParameterization, str]


def homography_at_depth(ref: Camera, src: Camera, z: float) -> np.ndarray:
    """
    Map homogeneous reference pixels on the fronto-parallel plane at depth z
    to source pixels.

    H = K_src · R_src · (I + (C_ref − C_src)·n_refᵀ / z) · R_refᵀ · K_ref⁻¹,
    with C the camera centers and n_ref the reference optical axis. The
    result is normalized so H[2,2] = 1; identical cameras give the identity.
    """
    if not z > 0:
        raise CameraError(f"Plane depth must be positive, got {z}")
    if ref.same_pose(src):
        return np.eye(3)
    baseline = np.outer(ref.center - src.center, ref.look_at) / z
    H = src.K @ src.R @ (np.eye(3) + baseline) @ ref.R.T @ ref.K_inv
    if abs(H[2, 2]) > 1e-300:
        H = H / H[2, 2]
    return H


def apply_homography(H: np.ndarray, pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Warp (x, y) pixels [N,2]; returns warped pixels and the homogeneous w."""
    homogeneous = np.concatenate([pixels, np.ones((len(pixels), 1))], axis=1) @ H.T
    w = homogeneous[:, 2]
    safe = np.where(np.abs(w) < 1e-12, 1e-12, w)
    return homogeneous[:, :2] / safe[:, None], w


def depth_hypotheses(
    near: float, far: float, count: int, parameterization: Parameterization = "linear"
) -> np.ndarray:
    """`count` depths from near to far, uniform in z or in inverse depth."""
    if count < 2:
        raise CameraError(f"Need at least two depth planes, got {count}")
    steps = np.linspace(0.0, 1.0, count)
    return z_of_zn(steps, near, far, parameterization)


def zn_of_z(z, near: float, far: float, parameterization: Parameterization = "linear"):
    if DepthParameterization(parameterization) is DepthParameterization.DISPARITY:
        return (1.0 / z - 1.0 / near) / (1.0 / far - 1.0 / near)
    return (z - near) / (far - near)


def z_of_zn(zn, near: float, far: float, parameterization: Parameterization = "linear"):
    if DepthParameterization(parameterization) is DepthParameterization.DISPARITY:
        return 1.0 / (1.0 / near + zn * (1.0 / far - 1.0 / near))
    return near + zn * (far - near)


def ndc_of(
    ref: Camera, x_ref_frame: np.ndarray, parameterization: Parameterization = "linear"
) -> NdcPoint:
    """NDC coordinates of reference-frame points [N,3]."""
    x = np.atleast_2d(np.asarray(x_ref_frame, dtype=np.float64))
    z = x[:, 2]
    if np.any(z <= 0):
        raise CameraError(f"{int((z <= 0).sum())} points lie at or behind the reference camera")
    pixels = x @ ref.K.T
    px, py = pixels[:, 0] / z, pixels[:, 1] / z
    return NdcPoint(
        u=px / (ref.width - 1),
        v=py / (ref.height - 1),
        zn=zn_of_z(z, ref.near, ref.far, parameterization),
    )


def ndc_inverse(
    ref: Camera, ndc: Union[NdcPoint, np.ndarray], parameterization: Parameterization = "linear"
) -> np.ndarray:
    """Reference-frame points [N,3] of NDC coordinates."""
    array = ndc.as_array() if isinstance(ndc, NdcPoint) else np.atleast_2d(ndc)
    z = z_of_zn(array[:, 2], ref.near, ref.far, parameterization)
    pixels = np.stack(
        [array[:, 0] * (ref.width - 1), array[:, 1] * (ref.height - 1), np.ones(len(array))],
        axis=-1,
    )
    return (pixels @ ref.K_inv.T) * z[:, None]


def ref_to_world(ref: Camera, x_ref_frame: np.ndarray) -> np.ndarray:
    return ref.camera_to_world(x_ref_frame)


def world_to_ref(ref: Camera, x_world: np.ndarray) -> np.ndarray:
    return ref.world_to_camera(x_world)


def project_to_view(cam: Camera, x_world: np.ndarray):
    """
    Pinhole projection of world points [N,3].

    Returns (u_px, v_px, depth, in_front). Points at or behind the camera
    get their depth clamped to a small positive value so their pixels stay
    finite; `in_front` flags them.
    """
    x_cam = cam.world_to_camera(np.atleast_2d(x_world))
    depth = x_cam[:, 2]
    in_front = depth > 0
    safe = np.where(in_front, depth, 1e-9)
    pixels = x_cam @ cam.K.T
    if not np.all(in_front):
        logger.debug(f"{int((~in_front).sum())} points project from behind the camera")
    return pixels[:, 0] / safe, pixels[:, 1] / safe, depth, in_front


def unproject(cam: Camera, pixels: np.ndarray, depth: np.ndarray) -> np.ndarray:
    """World points at camera depth `depth` behind (x, y) pixels [N,2]."""
    pixels = np.atleast_2d(pixels)
    homogeneous = np.concatenate([pixels, np.ones((len(pixels), 1))], axis=1)
    x_cam = (homogeneous @ cam.K_inv.T) * np.asarray(depth, dtype=np.float64).reshape(-1, 1)
    return cam.camera_to_world(x_cam)


def pixel_grid(width: int, height: int) -> np.ndarray:
    """All (x, y) pixels of an image in row-major order, shape [H·W, 2]."""
    ys, xs = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    return np.stack([xs.ravel(), ys.ravel()], axis=-1).astype(np.float64)


def generate_rays(
    ref: Camera, target: Camera, pixels: np.ndarray, colors: np.ndarray = None
) -> RayBatch:
    """
    Rays through target pixels [N,2], expressed in the reference frame.

    Origins and directions are built in world space and then rotated and
    translated into the reference camera frame.
    """
    pixels = np.atleast_2d(np.asarray(pixels, dtype=np.float64))
    homogeneous = np.concatenate([pixels, np.ones((len(pixels), 1))], axis=1)
    d_cam = homogeneous @ target.K_inv.T
    d_world = d_cam @ target.R
    d_world /= np.linalg.norm(d_world, axis=1, keepdims=True)
    origin_world = np.broadcast_to(target.center, d_world.shape)

    origins = ref.world_to_camera(origin_world)
    directions = d_world @ ref.R.T
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    depth_scale = d_world @ target.look_at
    return RayBatch(
        origins=origins,
        directions=directions,
        pixels=pixels,
        depth_scale=depth_scale,
        colors=None if colors is None else np.asarray(colors, dtype=np.float64),
    )
