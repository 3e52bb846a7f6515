"""Configuration management for mvsrf."""

from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.domain.model.enums import Background, DepthParameterization, FloatWidth


class Settings(BaseSettings):
    """Application settings."""

    # Runtime
    threads: int = Field(default=1, alias="MVSR_THREADS")
    seed: int = Field(default=0, alias="MVSR_SEED")
    float_width: FloatWidth = Field(default=FloatWidth.FLOAT64, alias="MVSR_FLOAT_WIDTH")
    data_dir: Path = Field(default=Path("data"), alias="MVSR_DATA_DIR")

    # Architecture
    feature_channels: int = Field(default=32, alias="MVSR_FEATURE_CHANNELS")
    encoding_channels: int = Field(default=32, alias="MVSR_ENCODING_CHANNELS")
    depth_planes: int = Field(default=128, alias="MVSR_DEPTH_PLANES")
    mlp_width: int = Field(default=256, alias="MVSR_MLP_WIDTH")
    position_freqs: int = Field(default=10, alias="MVSR_POSITION_FREQS")
    direction_freqs: int = Field(default=4, alias="MVSR_DIRECTION_FREQS")
    include_pi: bool = Field(default=False, alias="MVSR_PE_INCLUDE_PI")
    parameterization: DepthParameterization = Field(
        default=DepthParameterization.LINEAR, alias="MVSR_DEPTH_PARAMETERIZATION"
    )
    background: Background = Field(default=Background.BLACK, alias="MVSR_BACKGROUND")
    bn_momentum: float = Field(default=0.1, alias="MVSR_BN_MOMENTUM")
    bn_eps: float = Field(default=1e-5, alias="MVSR_BN_EPS")

    # Optimization
    n_samples: int = Field(default=128, alias="MVSR_SAMPLES")
    rays_per_batch: int = Field(default=1024, alias="MVSR_RAYS_PER_BATCH")
    learning_rate: float = Field(default=5e-4, alias="MVSR_LEARNING_RATE")
    iterations: int = Field(default=2000, alias="MVSR_ITERATIONS")
    lr_decay: float = Field(default=1.0, alias="MVSR_LR_DECAY")
    lr_decay_steps: int = Field(default=1000, alias="MVSR_LR_DECAY_STEPS")
    grad_clip: Optional[float] = Field(default=None, alias="MVSR_GRAD_CLIP")
    checkpoint_interval: int = Field(default=500, alias="MVSR_CHECKPOINT_INTERVAL")
    finetune_pad: int = Field(default=0, alias="MVSR_FINETUNE_PAD")

    # Rendering
    render_chunk: int = Field(default=4096, alias="MVSR_RENDER_CHUNK")

    # Logging
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_format: str = Field(default="text", alias="LOG_FORMAT")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("float_width", mode="before")
    @classmethod
    def parse_float_width(cls, value):
        """Environment values arrive as strings such as "4"."""
        if isinstance(value, str) and value.strip().isdigit():
            return int(value)
        return value

    @model_validator(mode="after")
    def check_positive(self) -> "Settings":
        """Reject hyperparameters that cannot describe a runnable pipeline."""
        for name in (
            "threads",
            "feature_channels",
            "encoding_channels",
            "mlp_width",
            "rays_per_batch",
            "learning_rate",
            "iterations",
            "lr_decay",
            "lr_decay_steps",
            "checkpoint_interval",
            "render_chunk",
            "bn_momentum",
            "bn_eps",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.depth_planes < 2 or self.n_samples < 2:
            raise ValueError("depth_planes and n_samples must be at least 2")
        if self.seed < 0 or self.finetune_pad < 0:
            raise ValueError("seed and finetune_pad must be non-negative")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ValueError("grad_clip must be positive when set")
        if self.log_format not in ("text", "json"):
            raise ValueError(f"log_format must be 'text' or 'json', got {self.log_format!r}")
        return self

    @property
    def dtype(self) -> type:
        """Numpy dtype matching the float width."""
        return np.float32 if self.float_width is FloatWidth.FLOAT32 else np.float64


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
