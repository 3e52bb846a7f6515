"""Serialized description of procedurally generated toy scenes."""

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.domain.model.enums import Background
from src.domain.model.scene.toy_scene import Box, Primitive, Sphere, ToyScene

Vector = tuple[float, float, float]


class PrimitiveSchema(BaseModel):
    """One box or sphere of a toy scene."""

    kind: Literal["box", "sphere"] = Field(..., description="Primitive shape")
    density: Optional[float] = Field(
        default=None, ge=0.0, description="Constant density; null for an opaque primitive"
    )
    albedo: Vector = Field(..., description="Base RGB albedo in [0,1]")
    secondary_albedo: Optional[Vector] = Field(
        default=None, description="Second checkerboard color"
    )
    checker_size: Optional[float] = Field(default=None, gt=0.0, description="Checker cell size")
    view_axis: Optional[Vector] = Field(
        default=None, description="Axis of direction-dependent radiance"
    )
    view_strength: float = Field(default=0.0, description="Strength of the directional term")
    center: Vector = Field(..., description="Center in scene units")
    half_extents: Optional[Vector] = Field(default=None, description="Box half extents")
    radius: Optional[float] = Field(default=None, gt=0.0, description="Sphere radius")

    @classmethod
    def from_domain(cls, primitive: Primitive) -> "PrimitiveSchema":
        common = dict(
            density=None if primitive.opaque else primitive.density,
            albedo=primitive.albedo,
            secondary_albedo=primitive.secondary_albedo,
            checker_size=primitive.checker_size,
            view_axis=primitive.view_axis,
            view_strength=primitive.view_strength,
            center=primitive.center,
        )
        if isinstance(primitive, Sphere):
            return cls(kind="sphere", radius=primitive.radius, **common)
        return cls(kind="box", half_extents=primitive.half_extents, **common)

    def to_domain(self) -> Primitive:
        common = dict(
            density=math.inf if self.density is None else self.density,
            albedo=self.albedo,
            secondary_albedo=self.secondary_albedo,
            checker_size=self.checker_size,
            view_axis=self.view_axis,
            view_strength=self.view_strength,
            center=self.center,
        )
        if self.kind == "sphere":
            return Sphere(radius=self.radius if self.radius is not None else 0.1, **common)
        return Box(half_extents=self.half_extents or (0.1, 0.1, 0.1), **common)


class ToySceneSchema(BaseModel):
    """Contents of a scene directory's `scene.json`."""

    id: str = Field(..., description="Scene identifier")
    seed: int = Field(..., ge=0, description="Generator seed")
    background: Background = Field(default=Background.BLACK, description="Background color")
    primitives: list[PrimitiveSchema] = Field(default_factory=list, description="Primitives")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "id": "scene_0007",
                "seed": 7,
                "background": "black",
                "primitives": [
                    {
                        "kind": "sphere",
                        "density": None,
                        "albedo": [0.8, 0.2, 0.2],
                        "center": [0.0, 0.0, 0.0],
                        "radius": 0.12,
                    }
                ],
            }
        }
    )

    @classmethod
    def from_domain(cls, scene: ToyScene) -> "ToySceneSchema":
        return cls(
            id=scene.id,
            seed=scene.seed,
            background=scene.background,
            primitives=[PrimitiveSchema.from_domain(p) for p in scene.primitives],
        )

    def to_domain(self) -> ToyScene:
        return ToyScene(
            id=self.id,
            seed=self.seed,
            background=self.background,
            primitives=[p.to_domain() for p in self.primitives],
        )
