"""JSON overrides for training and fine-tuning runs."""

from dataclasses import replace
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from src.domain.model.enums import FloatWidth
from src.domain.model.training.train_config import TrainConfig


class TrainConfigOverrides(BaseModel):
    """Fields of a `--config` file; anything left out keeps its configured value."""

    rays_per_batch: Optional[int] = Field(default=None, gt=0, description="Rays per step")
    learning_rate: Optional[float] = Field(default=None, gt=0.0, description="Adam step size")
    iterations: Optional[int] = Field(default=None, gt=0, description="Optimization steps")
    seed: Optional[int] = Field(default=None, ge=0, description="Seed for all randomness")
    n_samples: Optional[int] = Field(default=None, ge=2, description="Shading points per ray")
    depth_planes: Optional[int] = Field(default=None, ge=2, description="Plane-sweep depths")
    float_width: Optional[FloatWidth] = Field(default=None, description="4 or 8 byte floats")
    lr_decay: Optional[float] = Field(
        default=None, gt=0.0, le=1.0, description="Learning-rate factor per decay period"
    )
    lr_decay_steps: Optional[int] = Field(default=None, gt=0, description="Decay period")
    grad_clip: Optional[float] = Field(default=None, gt=0.0, description="Global-norm clip")
    checkpoint_interval: Optional[int] = Field(
        default=None, gt=0, description="Steps between checkpoints"
    )
    jitter: Optional[bool] = Field(default=None, description="Jitter samples inside strata")

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {"iterations": 20000, "depth_planes": 32, "n_samples": 64, "seed": 3}
        },
    )

    def apply(self, base: TrainConfig) -> TrainConfig:
        return replace(base, **self.model_dump(exclude_none=True))
