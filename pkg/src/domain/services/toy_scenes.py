"""
Procedural toy scenes, their camera rig and the analytic reference renderer.

The reference renderer intersects every ray with every primitive, merges the
intervals into segments of constant total density, and composites them with
closed-form transmittance. It is the ground truth for images and depths.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.domain.model.camera.camera import Camera
from src.domain.model.enums import Background, SplitTag
from src.domain.model.scene.toy_scene import WORKING_CUBE_HALF, Box, Primitive, Sphere, ToyScene
from src.domain.services.geometry import pixel_grid

logger = logging.getLogger(__name__)

CAMERA_DISTANCE = 3.0
CAMERA_NEAR = 2.1
CAMERA_FAR = 3.9
HALF_FOV_DEG = 18.0
ELEVATIONS_DEG = (12.0, 22.0, 32.0, 42.0)
AZIMUTHS_DEG = (-32.0, -16.0, 0.0, 16.0, 32.0)
INPUT_POSES = ((22.0, 0.0), (22.0, -16.0), (22.0, 16.0))
TEST_POSES = ((12.0, -16.0), (12.0, 16.0), (32.0, -16.0), (32.0, 16.0))
DEFAULT_WIDTH = 80
DEFAULT_HEIGHT = 64


@dataclass(frozen=True)
class RigView:
    view_id: str
    camera: Camera
    split: SplitTag
    elevation: float
    azimuth: float


def rig_camera(elevation_deg: float, azimuth_deg: float, width: int, height: int) -> Camera:
    e, a = math.radians(elevation_deg), math.radians(azimuth_deg)
    eye = CAMERA_DISTANCE * np.array(
        [math.cos(e) * math.sin(a), math.sin(e), math.cos(e) * math.cos(a)]
    )
    focal = (min(width, height) / 2.0) / math.tan(math.radians(HALF_FOV_DEG))
    return Camera.looking_at(eye, (0.0, 0.0, 0.0), focal, width, height, CAMERA_NEAR, CAMERA_FAR)


def camera_rig(width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT) -> list[RigView]:
    """
    Twenty cameras on a 4×5 elevation/azimuth grid, all facing the origin.

    Views are ordered inputs first (reference, left, right), then the
    fine-tuning views, then the four test views.
    """
    poses = [(e, a) for e in ELEVATIONS_DEG for a in AZIMUTHS_DEG]
    finetune = [p for p in poses if p not in INPUT_POSES and p not in TEST_POSES]
    ordered = (
        [(p, SplitTag.INPUT) for p in INPUT_POSES]
        + [(p, SplitTag.FINETUNE) for p in finetune]
        + [(p, SplitTag.TEST) for p in TEST_POSES]
    )
    return [
        RigView(f"view_{i:02d}", rig_camera(e, a, width, height), split, e, a)
        for i, ((e, a), split) in enumerate(ordered)
    ]


def _random_color(rng: np.random.Generator) -> tuple[float, float, float]:
    return tuple(float(c) for c in rng.uniform(0.15, 0.95, size=3))


def generate_toy_scene(
    seed: int,
    ground: bool = True,
    emitter: bool = False,
    max_objects: int = 3,
    background: Background = Background.BLACK,
) -> ToyScene:
    """Deterministic arrangement of boxes and spheres above an optional checker slab."""
    rng = np.random.default_rng(seed)
    primitives: list[Primitive] = []
    floor = -WORKING_CUBE_HALF
    if ground:
        primitives.append(
            Box(
                density=math.inf,
                albedo=(0.8, 0.8, 0.8),
                secondary_albedo=(0.25, 0.25, 0.25),
                checker_size=0.125,
                center=(0.0, -0.45, 0.0),
                half_extents=(0.35, 0.05, 0.35),
            )
        )
        floor = -0.4
    count = int(rng.integers(1, max_objects + 1))
    for i in range(count):
        size = float(rng.uniform(0.08, 0.15))
        x, z = (float(c) for c in rng.uniform(-0.2, 0.2, size=2))
        y = float(rng.uniform(floor + size, 0.2))
        opaque = bool(rng.uniform() < 0.6)
        density = math.inf if opaque else float(rng.uniform(8.0, 40.0))
        view_axis, strength = None, 0.0
        if emitter and i == 0:
            view_axis = tuple(float(c) for c in rng.normal(size=3))
            strength = 0.4
        common = dict(
            density=density,
            albedo=_random_color(rng),
            view_axis=view_axis,
            view_strength=strength,
            center=(x, y, z),
        )
        if rng.uniform() < 0.5:
            extents = tuple(float(size * f) for f in rng.uniform(0.6, 1.0, size=3))
            primitives.append(Box(half_extents=extents, **common))
        else:
            primitives.append(Sphere(radius=size, **common))
    return ToyScene(id=f"scene_{seed:04d}", primitives=primitives, background=background, seed=seed)


def _segment_colors(scene: ToyScene, cover, opaque_cover, points, directions, densities):
    """Density-weighted mix of the covering primitives' colors, opaque ones dominating."""
    n = points.shape[0]
    total = np.zeros((n, 3))
    weight = np.zeros(n)
    opaque_total = np.zeros((n, 3))
    opaque_count = np.zeros(n)
    for p, primitive in enumerate(scene.primitives):
        active = cover[:, p]
        if not active.any():
            continue
        color = primitive.color(points[active], directions[active])
        if primitive.opaque:
            opaque_total[active] += color
            opaque_count[active] += 1
        else:
            total[active] += densities[p] * color
            weight[active] += densities[p]
    with np.errstate(invalid="ignore", divide="ignore"):
        mixed = np.where(weight[:, None] > 0, total / weight[:, None], 0.0)
        hard = np.where(opaque_count[:, None] > 0, opaque_total / opaque_count[:, None], 0.0)
    return np.where(opaque_cover[:, None], hard, mixed)


def reference_render(
    scene: ToyScene, cam: Camera, n_quadrature: int = 1024
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Exact rendering of a toy scene: (image [H,W,3], depth [H,W], alpha [H,W]).

    Depth is the expected camera-frame z under the compositing weights; rays
    that hit nothing report the camera's far depth. Segment colors are
    integrated over `n_quadrature` sub-intervals when they vary along the ray.
    """
    pixels = pixel_grid(cam.width, cam.height)
    homogeneous = np.concatenate([pixels, np.ones((len(pixels), 1))], axis=1)
    directions = (homogeneous @ cam.K_inv.T) @ cam.R
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    origins = np.broadcast_to(cam.center, directions.shape)
    cos = directions @ cam.look_at
    n_rays = len(pixels)
    bg = np.asarray(scene.background.rgb)

    if scene.is_empty:
        image = np.broadcast_to(bg, (cam.height, cam.width, 3)).copy()
        return image, np.full((cam.height, cam.width), cam.far), np.zeros((cam.height, cam.width))

    hits = [p.intersect(origins, directions) for p in scene.primitives]
    t_in = np.stack([h[0] for h in hits], axis=1)
    t_out = np.stack([h[1] for h in hits], axis=1)
    hit = np.stack([h[2] for h in hits], axis=1)
    densities = np.array([p.density for p in scene.primitives])
    # Opaque primitives are shaded at their entry point; only translucent
    # ones with spatially or directionally varying color need sub-intervals.
    varying = any(
        not p.opaque
        and (p.checker_size is not None or (p.view_axis is not None and p.view_strength))
        for p in scene.primitives
    )
    n_sub = max(1, n_quadrature) if varying else 1

    bounds = np.sort(
        np.concatenate([np.where(hit, t_in, np.inf), np.where(hit, t_out, np.inf)], axis=1), axis=1
    )
    transmittance = np.ones(n_rays)
    color = np.zeros((n_rays, 3))
    weighted_t = np.zeros(n_rays)
    for j in range(bounds.shape[1] - 1):
        a, b = bounds[:, j], bounds[:, j + 1]
        live = np.isfinite(b) & (b > a) & (transmittance > 0)
        if not live.any():
            continue
        mid = 0.5 * (a + np.where(live, b, a))
        cover = hit & (t_in <= mid[:, None]) & (t_out >= mid[:, None]) & live[:, None]
        opaque_cover = (cover & np.isinf(densities)[None, :]).any(axis=1)
        sigma = np.where(cover & ~np.isinf(densities)[None, :], densities[None, :], 0.0).sum(axis=1)

        # Opaque segments absorb everything at their entry point.
        entry = live & opaque_cover
        if entry.any():
            pts = origins[entry] + a[entry, None] * directions[entry]
            c = _segment_colors(
                scene, cover[entry], opaque_cover[entry], pts, directions[entry], densities
            )
            color[entry] += transmittance[entry, None] * c
            weighted_t[entry] += transmittance[entry] * a[entry]
            transmittance[entry] = 0.0

        medium = live & ~opaque_cover & (sigma > 0)
        if medium.any():
            idx = np.flatnonzero(medium)
            s, lo, length = sigma[idx], a[idx], (b - a)[idx]
            edges = lo[:, None] + length[:, None] * np.linspace(0.0, 1.0, n_sub + 1)[None, :]
            survive = np.exp(-s[:, None] * (edges - lo[:, None]))
            weights = transmittance[idx, None] * (survive[:, :-1] - survive[:, 1:])
            centers = 0.5 * (edges[:, :-1] + edges[:, 1:])
            for k in range(n_sub):
                pts = origins[idx] + centers[:, k, None] * directions[idx]
                c = _segment_colors(
                    scene, cover[idx], opaque_cover[idx], pts, directions[idx], densities
                )
                color[idx] += weights[:, k, None] * c
            # Closed form of the integral of t·σ·exp(−σ(t − a)) over the segment.
            end = lo + length
            weighted_t[idx] += transmittance[idx] * (
                (lo + 1.0 / s) - np.exp(-s * length) * (end + 1.0 / s)
            )
            transmittance[idx] *= np.exp(-s * length)

    alpha = 1.0 - transmittance
    color += transmittance[:, None] * bg
    with np.errstate(invalid="ignore", divide="ignore"):
        depth = np.where(alpha > 1e-12, weighted_t / np.maximum(alpha, 1e-300) * cos, cam.far)
    logger.debug(f"Reference render of {scene.id}: {int((alpha > 0.5).sum())} covered pixels")
    return (
        color.reshape(cam.height, cam.width, 3),
        depth.reshape(cam.height, cam.width),
        alpha.reshape(cam.height, cam.width),
    )
