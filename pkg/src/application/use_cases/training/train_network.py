"""
Use case for end-to-end training across a pool of scenes.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from src.application.services.checkpoints import (
    TRAIN_ITERATION,
    load_optimizer_state,
    pipeline_entries,
    stored_iteration,
)
from src.application.services.pipeline import MVSPipeline, PipelineOptions
from src.application.services.trainer import train_step
from src.domain.autodiff import default_float_width
from src.domain.model.enums import SplitTag
from src.domain.model.scene.scene_sample import SceneDataset, SceneSample
from src.domain.model.training.train_config import TrainConfig
from src.domain.ports.repositories.checkpoint_repository import CheckpointRepository
from src.domain.ports.repositories.scene_repository import SceneRepository
from src.domain.ports.services.training_log_port import TrainingLogPort
from src.domain.shared_kernel import SceneFormatError

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.mvsr"
LOG_NAME = "train_log.csv"


@dataclass
class TrainNetworkCommand:
    """Command to train the networks on every scene below `scenes`"""
    scenes: Path
    out: Path
    config: TrainConfig = field(default_factory=TrainConfig)
    options: PipelineOptions = field(default_factory=PipelineOptions)
    resume: Optional[Path] = None


@dataclass
class TrainingResult:
    checkpoint: Path
    losses: list[float]


def pick_scene(seed: int, iteration: int, count: int) -> int:
    """Scene drawn for one step; depends only on (seed, iteration) so resumed runs agree."""
    return int(np.random.default_rng([seed, iteration, 1]).integers(count))


def training_sample(dataset: SceneDataset) -> SceneSample:
    """The three input views and the first non-input view of the manifest."""
    for view in dataset.views:
        if view.split is not SplitTag.INPUT:
            return dataset.sample(view)
    raise SceneFormatError(f"Scene {dataset.name} has no view besides its inputs")


class TrainNetworkUseCase:
    """Use case for training the feature extractor, encoding UNet and MLP jointly"""

    def __init__(
        self,
        scene_repository: SceneRepository,
        checkpoint_repository: CheckpointRepository,
        training_log: TrainingLogPort,
    ):
        self._scene_repo = scene_repository
        self._checkpoint_repo = checkpoint_repository
        self._log = training_log

    def execute(self, command: TrainNetworkCommand) -> TrainingResult:
        """
        Train for `config.iterations` steps, one uniformly drawn scene per step.

        Resuming restores the weights, the Adam moments and the iteration
        counter, so an interrupted run continues where it stopped.

        Args:
            command: TrainNetworkCommand with the scene pool and run settings

        Returns:
            Path of the final checkpoint and the per-step losses
        """
        config = command.config
        roots = self._scene_repo.list_scenes(command.scenes)
        if not roots:
            raise SceneFormatError(f"No scenes found below {command.scenes}")
        samples = [training_sample(self._scene_repo.load(root)) for root in roots]
        options = replace(command.options, depth_planes=config.depth_planes)
        checkpoint = command.out / CHECKPOINT_NAME
        losses: list[float] = []

        with default_float_width(config.float_width):
            pipeline = MVSPipeline(options, seed=config.seed)
            start = 0
            if command.resume is not None:
                entries, _ = self._checkpoint_repo.load(command.resume)
                pipeline.load_state_dict(entries)
                load_optimizer_state(pipeline.named_parameters(), entries)
                start = stored_iteration(entries, TRAIN_ITERATION)
                logger.info(f"Resumed training from {command.resume} at iteration {start}")
            self._log.open(command.out / LOG_NAME)
            logger.info(
                f"Training on {len(samples)} scene(s) for {config.iterations} iterations, "
                f"seed {config.seed}"
            )
            try:
                for iteration in range(start, start + config.iterations):
                    sample = samples[pick_scene(config.seed, iteration, len(samples))]
                    started = time.perf_counter()
                    loss = train_step(pipeline, sample, config, iteration)
                    wall_ms = (time.perf_counter() - started) * 1000.0
                    losses.append(loss)
                    self._log.log_step(iteration + 1, loss, wall_ms, config.seed)
                    if (iteration + 1) % config.checkpoint_interval == 0:
                        self._save(checkpoint, pipeline, config, iteration + 1)
                        logger.info(f"Iteration {iteration + 1}: loss {loss:.6f}, checkpoint saved")
            finally:
                self._log.close()
            self._save(checkpoint, pipeline, config, start + config.iterations)
        logger.info(f"Training finished; checkpoint at {checkpoint}")
        return TrainingResult(checkpoint=checkpoint, losses=losses)

    def _save(
        self, path: Path, pipeline: MVSPipeline, config: TrainConfig, iteration: int
    ) -> None:
        self._checkpoint_repo.save(
            path, pipeline_entries(pipeline, iteration), config.float_width
        )
