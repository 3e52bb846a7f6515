from dataclasses import dataclass, field
from typing import Optional

from src.domain.model.enums import FloatWidth
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.shared_kernel import DomainException, Entity, ValueObject


@dataclass(frozen=True)
class TrainConfig(ValueObject):
    """Optimization settings shared by training and fine-tuning."""

    rays_per_batch: int = 1024
    learning_rate: float = 5e-4
    iterations: int = 2000
    seed: int = 0
    n_samples: int = 128
    depth_planes: int = 128
    float_width: FloatWidth = FloatWidth.FLOAT64
    lr_decay: float = 1.0
    lr_decay_steps: int = 1000
    grad_clip: Optional[float] = None
    checkpoint_interval: int = 500
    jitter: bool = True

    def __post_init__(self) -> None:
        for name in (
            "rays_per_batch",
            "learning_rate",
            "iterations",
            "n_samples",
            "depth_planes",
            "lr_decay",
            "lr_decay_steps",
            "checkpoint_interval",
        ):
            if not getattr(self, name) > 0:
                raise DomainException(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_samples < 2:
            raise DomainException("n_samples must be at least 2")
        if self.seed < 0:
            raise DomainException("seed must be non-negative")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise DomainException("grad_clip must be positive when set")

    def learning_rate_at(self, iteration: int) -> float:
        return self.learning_rate * self.lr_decay ** (iteration / self.lr_decay_steps)


@dataclass(kw_only=True, eq=False)
class FinetuneSession(Entity):
    """
    Per-scene optimization state: the encoding volume with its appended colors
    and the radiance MLP. Parameters named in `frozen` never receive updates.
    """

    volume: EncodingVolume
    mlp: object
    config: TrainConfig
    frozen: frozenset[str] = frozenset()
    iteration: int = 0
    loss_log: list[tuple[int, float]] = field(default_factory=list)
    metric_log: list[tuple[int, float]] = field(default_factory=list)
