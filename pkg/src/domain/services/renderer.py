"""
Differentiable ray marching through the reference frustum.

Samples are stratified uniformly in NDC depth between the near and far
planes of the reference camera. Density is expressed per unit of NDC depth,
so opacities use the NDC stratum width: α = 1 − exp(−σ·δ).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Union

import numpy as np

from src.domain.autodiff import Tensor, no_grad
from src.domain.autodiff import functional as F
from src.domain.model.camera.camera import Camera, RayBatch
from src.domain.model.enums import DepthParameterization
from src.domain.model.field.samples import RaySamplePlan, VolumeSample
from src.domain.services.geometry import generate_rays, ndc_of, pixel_grid, z_of_zn, zn_of_z
from src.domain.shared_kernel import ShapeMismatchError

logger = logging.getLogger(__name__)

DEPTH_EPS = 1e-10


class RadianceSource(Protocol):
    """Anything that yields density and radiance at NDC points of a reference frustum."""

    @property
    def reference(self) -> Camera: ...

    def evaluate(self, ndc: np.ndarray, directions: np.ndarray) -> VolumeSample: ...


@dataclass
class CompositeResult:
    color: Tensor
    alpha: Tensor
    depth: Tensor
    weights: Tensor
    transmittance: Tensor


def sample_ray_points(
    rays: RayBatch,
    ref: Camera,
    n: int,
    jitter: bool = False,
    rng: Optional[np.random.Generator] = None,
    parameterization: Union[DepthParameterization, str] = DepthParameterization.LINEAR,
    seed: Optional[int] = None,
) -> RaySamplePlan:
    """
    n stratified samples per ray over its intersection with the near/far slab.

    Without jitter each sample sits at its stratum midpoint; with jitter it is
    drawn uniformly inside its stratum. Rays that miss the slab are marked
    empty and get zero-width strata at placeholder positions.
    """
    if n < 2:
        raise ShapeMismatchError("At least two samples per ray are required", ">= 2", n)
    origins, directions = rays.origins, rays.directions
    oz, dz = origins[:, 2], directions[:, 2]
    safe_dz = np.where(dz > 1e-12, dz, 1.0)
    t_near = np.maximum((ref.near - oz) / safe_dz, 0.0)
    t_far = (ref.far - oz) / safe_dz
    empty = (dz <= 1e-12) | (t_far <= t_near)

    zn0 = np.where(empty, 0.0, zn_of_z(oz + t_near * dz, ref.near, ref.far, parameterization))
    zn1 = np.where(empty, 1.0, zn_of_z(oz + t_far * dz, ref.near, ref.far, parameterization))
    zn0, zn1 = np.clip(zn0, 0.0, 1.0), np.clip(zn1, 0.0, 1.0)
    if jitter:
        if rng is None:
            rng = np.random.default_rng(seed)
        offsets = rng.uniform(size=(len(rays), n))
    else:
        offsets = np.full((len(rays), n), 0.5)
    width = (zn1 - zn0)[:, None] / n
    zn = zn0[:, None] + (np.arange(n)[None, :] + offsets) * width

    z = z_of_zn(zn, ref.near, ref.far, parameterization)
    distances = (z - oz[:, None]) / safe_dz[:, None]
    points = origins[:, None, :] + distances[..., None] * directions[:, None, :]
    if empty.any():
        # Placeholder points on the principal axis keep queries well defined.
        placeholder = np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=-1)
        points = np.where(empty[:, None, None], placeholder, points)
        distances = np.where(empty[:, None], z, distances)
        logger.debug(f"{int(empty.sum())} of {len(rays)} rays miss the depth slab")
    deltas = np.where(empty[:, None], 0.0, np.broadcast_to(width, zn.shape))
    return RaySamplePlan(
        zn=zn, deltas=deltas, distances=distances, points=points, empty=empty, seed=seed
    )


def composite(
    sample: VolumeSample,
    deltas: np.ndarray,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    depths: Optional[np.ndarray] = None,
) -> CompositeResult:
    """
    Alpha-composite R rays of n samples: sigma [R,n], radiance [R,n,3].

    τ_k = exp(−Σ_{j<k} σ_j δ_j), w_k = τ_k (1 − exp(−σ_k δ_k)),
    color = Σ w_k r_k + τ_{n+1}·background, depth = Σ w_k z_k / max(Σ w_k, ε).
    """
    sigma, radiance = sample.sigma, sample.radiance
    if sigma.shape != deltas.shape or radiance.shape != sigma.shape + (3,):
        raise ShapeMismatchError(
            "Samples and step lengths must align", deltas.shape, (sigma.shape, radiance.shape)
        )
    optical = F.mul(sigma, deltas)
    alpha = F.sub(1.0, F.exp(F.neg(optical)))
    transmittance = F.exp(F.neg(F.cumsum(optical, axis=1, exclusive=True)))
    weights = F.mul(transmittance, alpha)
    residual = F.exp(F.neg(F.sum(optical, axis=1)))
    color = F.sum(F.mul(F.reshape(weights, weights.shape + (1,)), radiance), axis=1)
    bg = np.asarray(background, dtype=color.dtype).reshape(1, 3)
    color = F.add(color, F.mul(F.reshape(residual, (-1, 1)), bg))
    accumulated = F.sum(weights, axis=1)
    z = depths if depths is not None else np.broadcast_to(np.arange(sigma.shape[1]), sigma.shape)
    depth = F.div(F.sum(F.mul(weights, z), axis=1), np.maximum(accumulated.data, DEPTH_EPS))
    return CompositeResult(
        color=color, alpha=accumulated, depth=depth, weights=weights, transmittance=residual
    )


@dataclass
class RenderResult:
    color: Tensor
    alpha: Tensor
    depth: Tensor
    plan: RaySamplePlan


def render_rays(
    field: RadianceSource,
    rays: RayBatch,
    n_samples: int,
    jitter: bool = False,
    rng: Optional[np.random.Generator] = None,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    parameterization: Union[DepthParameterization, str] = DepthParameterization.LINEAR,
    empty_depth: Optional[float] = None,
) -> RenderResult:
    """Sample, query, decode and composite a batch of rays."""
    ref = field.reference
    plan = sample_ray_points(rays, ref, n_samples, jitter, rng, parameterization)
    r, n = plan.n_rays, plan.n_samples
    ndc = ndc_of(ref, plan.points.reshape(-1, 3), parameterization).as_array()
    directions = np.repeat(rays.directions, n, axis=0)
    sample = field.evaluate(ndc, directions)
    shaped = VolumeSample(
        sigma=F.reshape(sample.sigma, (r, n)), radiance=F.reshape(sample.radiance, (r, n, 3))
    )
    result = composite(shaped, plan.deltas, background, plan.distances * rays.depth_scale[:, None])
    depth = result.depth
    if plan.empty.any():
        fill = ref.far if empty_depth is None else empty_depth
        depth = F.where(plan.empty, np.full(r, fill), depth)
    return RenderResult(color=result.color, alpha=result.alpha, depth=depth, plan=plan)


def render_image(
    field: RadianceSource,
    target: Camera,
    chunk: int = 4096,
    n_samples: int = 128,
    seed: int = 0,
    jitter: bool = False,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    parameterization: Union[DepthParameterization, str] = DepthParameterization.LINEAR,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Render every pixel of `target` in chunks; returns (image [H,W,3], depth [H,W], alpha [H,W]).

    Chunk i draws its jitter from a generator seeded with (seed, i), so the
    image does not depend on the thread schedule.
    """
    if chunk < 1:
        raise ShapeMismatchError("Chunk size must be positive", ">= 1", chunk)
    pixels = pixel_grid(target.width, target.height)
    starts = list(range(0, len(pixels), chunk))

    def run(index: int):
        with no_grad():
            rng = np.random.default_rng([seed, index]) if jitter else None
            block = pixels[starts[index] : starts[index] + chunk]
            rays = generate_rays(field.reference, target, block)
            out = render_rays(
                field, rays, n_samples, jitter, rng, background, parameterization, target.far
            )
            return out.color.data, out.depth.data, out.alpha.data

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(starts))))
    else:
        parts = [run(i) for i in range(len(starts))]
    color = np.concatenate([p[0] for p in parts]).reshape(target.height, target.width, 3)
    depth = np.concatenate([p[1] for p in parts]).reshape(target.height, target.width)
    alpha = np.concatenate([p[2] for p in parts]).reshape(target.height, target.width)
    logger.debug(f"Rendered {target.width}x{target.height} in {len(starts)} chunks")
    return color, depth, alpha
