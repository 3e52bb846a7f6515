"""Procedural scenes built from analytic primitives inside the unit working cube."""

import math
from abc import abstractmethod
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.domain.model.enums import Background
from src.domain.shared_kernel import Entity, SceneFormatError, ValueObject

WORKING_CUBE_HALF = 0.5


@dataclass(frozen=True, eq=False)
class Primitive(ValueObject):
    """
    Homogeneous medium with constant density and albedo.

    A density of `math.inf` makes the primitive opaque. With `checker_size`
    set, albedo alternates with `secondary_albedo` on an x/z checkerboard.
    With `view_axis` set, radiance is scaled by 1 + view_strength·(ray·axis).
    """

    density: float
    albedo: tuple[float, float, float]
    secondary_albedo: Optional[tuple[float, float, float]] = None
    checker_size: Optional[float] = None
    view_axis: Optional[tuple[float, float, float]] = None
    view_strength: float = 0.0

    def __post_init__(self) -> None:
        if not self.density >= 0:
            raise SceneFormatError(f"Density must be non-negative, got {self.density}")
        if any(not 0.0 <= a <= 1.0 for a in self.albedo):
            raise SceneFormatError(f"Albedo must lie in [0,1], got {self.albedo}")

    @property
    def opaque(self) -> bool:
        return math.isinf(self.density)

    @abstractmethod
    def intersect(self, origins: np.ndarray, directions: np.ndarray):
        """Return (t_in, t_out, hit) per ray, with t_in clipped at 0."""

    @abstractmethod
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned (lower, upper) corners."""

    def color(self, points: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """Radiance [N,3] at points [N,3] seen along directions [N,3]."""
        base = np.broadcast_to(np.asarray(self.albedo, dtype=np.float64), points.shape).copy()
        if self.checker_size and self.secondary_albedo is not None:
            cells = np.floor(points[:, 0] / self.checker_size) + np.floor(
                points[:, 2] / self.checker_size
            )
            odd = (cells.astype(np.int64) % 2) == 1
            base[odd] = self.secondary_albedo
        if self.view_axis is not None and self.view_strength:
            axis = np.asarray(self.view_axis, dtype=np.float64)
            axis = axis / np.linalg.norm(axis)
            base = base * (1.0 + self.view_strength * (directions @ axis))[:, None]
        return np.clip(base, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Box(Primitive):
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    half_extents: tuple[float, float, float] = (0.1, 0.1, 0.1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c, h = np.asarray(self.center, dtype=np.float64), np.asarray(self.half_extents)
        return c - h, c + h

    def intersect(self, origins: np.ndarray, directions: np.ndarray):
        lo, hi = self.bounds()
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - origins) / directions
            t2 = (hi - origins) / directions
        parallel = directions == 0
        inside = (origins >= lo) & (origins <= hi)
        t1 = np.where(parallel, np.where(inside, -np.inf, np.inf), t1)
        t2 = np.where(parallel, np.where(inside, np.inf, -np.inf), t2)
        t_in = np.minimum(t1, t2).max(axis=1)
        t_out = np.maximum(t1, t2).min(axis=1)
        t_in = np.maximum(t_in, 0.0)
        return t_in, t_out, t_out > t_in


@dataclass(frozen=True, eq=False)
class Sphere(Primitive):
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 0.1

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center, dtype=np.float64)
        return c - self.radius, c + self.radius

    def intersect(self, origins: np.ndarray, directions: np.ndarray):
        offset = origins - np.asarray(self.center, dtype=np.float64)
        a = (directions * directions).sum(axis=1)
        b = (offset * directions).sum(axis=1)
        c = (offset * offset).sum(axis=1) - self.radius**2
        disc = b * b - a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        t_in = np.maximum((-b - root) / a, 0.0)
        t_out = (-b + root) / a
        return t_in, t_out, (disc > 0) & (t_out > t_in)


@dataclass(kw_only=True, eq=False)
class ToyScene(Entity):
    """A deterministic scene description identified by its seed."""

    primitives: list[Primitive] = field(default_factory=list)
    background: Background = Background.BLACK
    seed: int = 0

    def __post_init__(self) -> None:
        for primitive in self.primitives:
            lo, hi = primitive.bounds()
            if np.any(lo < -WORKING_CUBE_HALF - 1e-12) or np.any(hi > WORKING_CUBE_HALF + 1e-12):
                raise SceneFormatError(f"Primitive {primitive} leaves the working cube")

    @property
    def is_empty(self) -> bool:
        return not self.primitives
