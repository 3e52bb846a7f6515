"""Pinhole cameras and the ray/NDC value objects expressed in their frames."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.domain.shared_kernel import CameraError, ValueObject

ORTHONORMAL_TOL = 1e-9


def _frozen(array, shape: tuple[int, ...], name: str) -> np.ndarray:
    out = np.array(array, dtype=np.float64)
    if out.shape != shape:
        raise CameraError(f"{name} must have shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise CameraError(f"{name} has non-finite entries")
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Camera(ValueObject):
    """
    Pinhole camera with world-to-camera rotation R and translation t.

    A world point X maps to camera coordinates R·X + t and to pixel
    coordinates K·(R·X + t) after division by depth. Integer pixel (i, j)
    sits at continuous coordinate (i, j). Geometry is always float64.
    """

    K: np.ndarray
    R: np.ndarray
    t: np.ndarray
    near: float
    far: float
    width: int
    height: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "K", _frozen(self.K, (3, 3), "K"))
        object.__setattr__(self, "R", _frozen(self.R, (3, 3), "R"))
        object.__setattr__(self, "t", _frozen(np.reshape(self.t, -1), (3,), "t"))
        object.__setattr__(self, "near", float(self.near))
        object.__setattr__(self, "far", float(self.far))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        self._validate()

    def _validate(self) -> None:
        error = np.abs(self.R.T @ self.R - np.eye(3)).max()
        if error >= ORTHONORMAL_TOL:
            raise CameraError(f"R is not orthonormal (max deviation {error:.3g})")
        if not 0.0 < self.near < self.far:
            raise CameraError(
                f"Depth range must satisfy 0 < near < far, got {self.near}, {self.far}"
            )
        K = self.K
        if K[1, 0] != 0.0 or K[2, 0] != 0.0 or K[2, 1] != 0.0:
            raise CameraError("K must be upper-triangular")
        if K[0, 0] <= 0.0 or K[1, 1] <= 0.0 or K[2, 2] <= 0.0:
            raise CameraError("K must have positive focal entries")
        if self.width < 2 or self.height < 2:
            raise CameraError(f"Image size must be at least 2x2, got {self.width}x{self.height}")

    @classmethod
    def looking_at(
        cls,
        eye,
        target,
        focal: float,
        width: int,
        height: int,
        near: float,
        far: float,
        up=(0.0, 1.0, 0.0),
    ) -> "Camera":
        """
        Camera at `eye` whose optical axis points at `target`.

        Image x runs along `forward × up` and image y along `forward × x`, so
        the world `up` direction points towards the top of the image.
        """
        eye = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.asarray(up, dtype=np.float64))
        norm = np.linalg.norm(right)
        if norm < 1e-12:
            raise CameraError("Up vector is parallel to the viewing direction")
        right /= norm
        down = np.cross(forward, right)
        R = np.stack([right, down, forward])
        K = np.array(
            [[focal, 0.0, (width - 1) / 2.0], [0.0, focal, (height - 1) / 2.0], [0.0, 0.0, 1.0]]
        )
        return cls(K=K, R=R, t=-R @ eye, near=near, far=far, width=width, height=height)

    @property
    def center(self) -> np.ndarray:
        """Camera position in world coordinates."""
        return -self.R.T @ self.t

    @property
    def look_at(self) -> np.ndarray:
        """Unit optical axis in world coordinates (third row of R)."""
        return self.R[2].copy()

    @property
    def K_inv(self) -> np.ndarray:
        return np.linalg.inv(self.K)

    def scaled(self, factor: float) -> "Camera":
        """Same pose, with intrinsics and image size scaled by `factor`."""
        K = self.K.copy()
        K[:2] *= factor
        return Camera(
            K=K,
            R=self.R,
            t=self.t,
            near=self.near,
            far=self.far,
            width=max(2, int(round(self.width * factor))),
            height=max(2, int(round(self.height * factor))),
        )

    def world_to_camera(self, x_world: np.ndarray) -> np.ndarray:
        return np.asarray(x_world, dtype=np.float64) @ self.R.T + self.t

    def camera_to_world(self, x_cam: np.ndarray) -> np.ndarray:
        return (np.asarray(x_cam, dtype=np.float64) - self.t) @ self.R

    def same_pose(self, other: "Camera") -> bool:
        return (
            np.array_equal(self.K, other.K)
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.t, other.t)
        )


@dataclass(frozen=True, eq=False)
class NdcPoint(ValueObject):
    """
    Batch of normalized reference-frustum coordinates.

    u and v are reference pixel coordinates divided by (W − 1) and (H − 1);
    zn is 0 on the near plane and 1 on the far plane.
    """

    u: np.ndarray
    v: np.ndarray
    zn: np.ndarray

    def __post_init__(self) -> None:
        for name in ("u", "v", "zn"):
            value = np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64))
            if not np.all(np.isfinite(value)):
                raise CameraError(f"NDC component {name} is not finite")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "NdcPoint":
        array = np.atleast_2d(array)
        return cls(u=array[:, 0], v=array[:, 1], zn=array[:, 2])

    def as_array(self) -> np.ndarray:
        return np.stack([self.u, self.v, self.zn], axis=-1)

    def __len__(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True, eq=False)
class RayBatch(ValueObject):
    """
    Rays expressed in the reference camera frame.

    `pixels` are the (x, y) target pixels the rays pass through and
    `depth_scale` converts a distance along a ray into target-camera depth.
    """

    origins: np.ndarray
    directions: np.ndarray
    pixels: np.ndarray
    depth_scale: np.ndarray
    colors: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        norms = np.linalg.norm(self.directions, axis=-1)
        if self.directions.size and np.abs(norms - 1.0).max() > 1e-9:
            raise CameraError("Ray directions must be unit vectors")
        if self.colors is not None and len(self.colors) != len(self.origins):
            raise CameraError("One color per ray is required")

    def __len__(self) -> int:
        return self.origins.shape[0]

    def subset(self, index) -> "RayBatch":
        return RayBatch(
            origins=self.origins[index],
            directions=self.directions[index],
            pixels=self.pixels[index],
            depth_scale=self.depth_scale[index],
            colors=None if self.colors is None else self.colors[index],
        )
