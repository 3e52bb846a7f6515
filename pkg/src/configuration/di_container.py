"""
Simple Dependency Injection Container for use cases.

This container provides fully constructed use cases with their dependencies,
following the Dependency Inversion Principle.
"""

from typing import Optional

from src.application.services.pipeline import PipelineOptions
from src.application.use_cases.evaluation import EvaluateRendersUseCase
from src.application.use_cases.rendering import RenderViewUseCase
from src.application.use_cases.scenes import GenerateScenesUseCase
from src.application.use_cases.training import FinetuneUseCase, TrainNetworkUseCase
from src.configuration.config import Settings, get_settings
from src.domain.model.training.train_config import TrainConfig
from src.infrastructure.adapters.secondary.logs.csv_metrics_table import CsvMetricsTable
from src.infrastructure.adapters.secondary.logs.csv_training_log import CsvTrainingLog
from src.infrastructure.adapters.secondary.persistence import (
    BinaryCheckpointRepository,
    FileImageRepository,
    FileSceneRepository,
)


class DIContainer:
    """
    Dependency Injection Container for use cases.

    Use cases receive the file-backed repositories; settings supply the
    worker count, render chunk and default hyperparameters.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self._settings = settings or get_settings()

    @property
    def settings(self) -> Settings:
        return self._settings

    # === Defaults from settings ===

    def pipeline_options(self) -> PipelineOptions:
        s = self._settings
        return PipelineOptions(
            feature_channels=s.feature_channels,
            encoding_channels=s.encoding_channels,
            depth_planes=s.depth_planes,
            mlp_width=s.mlp_width,
            position_freqs=s.position_freqs,
            direction_freqs=s.direction_freqs,
            include_pi=s.include_pi,
            parameterization=s.parameterization,
            background=s.background,
            bn_momentum=s.bn_momentum,
            bn_eps=s.bn_eps,
        )

    def train_config(self) -> TrainConfig:
        s = self._settings
        return TrainConfig(
            rays_per_batch=s.rays_per_batch,
            learning_rate=s.learning_rate,
            iterations=s.iterations,
            seed=s.seed,
            n_samples=s.n_samples,
            depth_planes=s.depth_planes,
            float_width=s.float_width,
            lr_decay=s.lr_decay,
            lr_decay_steps=s.lr_decay_steps,
            grad_clip=s.grad_clip,
            checkpoint_interval=s.checkpoint_interval,
        )

    # === Repositories ===

    def image_repository(self) -> FileImageRepository:
        return FileImageRepository()

    def scene_repository(self) -> FileSceneRepository:
        return FileSceneRepository(self.image_repository())

    def checkpoint_repository(self) -> BinaryCheckpointRepository:
        return BinaryCheckpointRepository()

    # === Use Cases ===

    def generate_scenes_use_case(self) -> GenerateScenesUseCase:
        """Get GenerateScenesUseCase with dependencies injected"""
        return GenerateScenesUseCase(self.scene_repository(), threads=self._settings.threads)

    def train_network_use_case(self) -> TrainNetworkUseCase:
        """Get TrainNetworkUseCase with dependencies injected"""
        return TrainNetworkUseCase(
            self.scene_repository(), self.checkpoint_repository(), CsvTrainingLog()
        )

    def finetune_use_case(self) -> FinetuneUseCase:
        """Get FinetuneUseCase with dependencies injected"""
        return FinetuneUseCase(
            self.scene_repository(),
            self.checkpoint_repository(),
            CsvTrainingLog(),
            chunk=self._settings.render_chunk,
            threads=self._settings.threads,
        )

    def render_view_use_case(self) -> RenderViewUseCase:
        """Get RenderViewUseCase with dependencies injected"""
        return RenderViewUseCase(
            self.scene_repository(),
            self.checkpoint_repository(),
            self.image_repository(),
            threads=self._settings.threads,
        )

    def evaluate_renders_use_case(self) -> EvaluateRendersUseCase:
        """Get EvaluateRendersUseCase with dependencies injected"""
        return EvaluateRendersUseCase(self.image_repository(), CsvMetricsTable())
