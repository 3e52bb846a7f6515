"""
Use case for per-scene fine-tuning of the encoding volume and the MLP.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from src.application.services.checkpoints import (
    is_session_checkpoint,
    load_optimizer_state,
    restore_session,
    session_entries,
)
from src.application.services.pipeline import MVSPipeline, PipelineOptions
from src.application.services.trainer import (
    Finetuner,
    named_session_parameters,
    start_finetune,
    trainable_volume,
)
from src.domain.autodiff import default_float_width
from src.domain.model.enums import SplitTag
from src.domain.model.training.train_config import FinetuneSession, TrainConfig
from src.domain.ports.repositories.checkpoint_repository import CheckpointRepository
from src.domain.ports.repositories.scene_repository import SceneRepository
from src.domain.ports.services.training_log_port import TrainingLogPort

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "finetuned.mvsr"
LOG_NAME = "finetune_log.csv"


@dataclass
class FinetuneCommand:
    """Command to fine-tune one scene starting from a trained checkpoint"""
    checkpoint: Path
    scene: Path
    iterations: int
    out: Path
    config: TrainConfig = field(default_factory=TrainConfig)
    options: PipelineOptions = field(default_factory=PipelineOptions)
    pad: int = 0
    from_scratch: bool = False


@dataclass
class FinetuneResult:
    session: FinetuneSession
    checkpoint: Path
    metric_log: list[tuple[int, float]]


class FinetuneUseCase:
    """Use case for optimizing a scene's volume and MLP with the CNNs frozen"""

    def __init__(
        self,
        scene_repository: SceneRepository,
        checkpoint_repository: CheckpointRepository,
        training_log: TrainingLogPort,
        chunk: int = 4096,
        threads: int = 1,
    ):
        self._scene_repo = scene_repository
        self._checkpoint_repo = checkpoint_repository
        self._log = training_log
        self._chunk = chunk
        self._threads = threads

    def execute(self, command: FinetuneCommand) -> FinetuneResult:
        """
        Fine-tune for `iterations` steps on the input and fine-tuning views.

        A checkpoint that already holds a fine-tuned volume resumes that
        session with its Adam state; otherwise the volume is predicted by the
        trained networks.

        Args:
            command: FinetuneCommand with checkpoint, scene and run settings

        Returns:
            The session, the written checkpoint and the held-out PSNR log
        """
        config = command.config
        dataset = self._scene_repo.load(command.scene)
        entries, _ = self._checkpoint_repo.load(command.checkpoint)
        inputs = dataset.input_views
        train_views = inputs + dataset.split(SplitTag.FINETUNE)
        checkpoint = command.out / CHECKPOINT_NAME

        with default_float_width(config.float_width):
            if is_session_checkpoint(entries):
                restored = restore_session(entries, command.options)
                options = restored.options
                session = FinetuneSession(
                    volume=trainable_volume(restored.volume),
                    mlp=restored.mlp,
                    config=config,
                    iteration=restored.iteration,
                )
                load_optimizer_state(named_session_parameters(session), entries)
                logger.info(f"Resuming fine-tuning at iteration {restored.iteration}")
            else:
                pipeline = MVSPipeline.from_state(entries, command.options)
                options = pipeline.options
                session = start_finetune(
                    pipeline,
                    [v.image for v in inputs],
                    [v.camera for v in inputs],
                    config,
                    pad=command.pad,
                    from_scratch=command.from_scratch,
                )
            finetuner = Finetuner(
                options,
                train_views,
                dataset.split(SplitTag.TEST),
                chunk=self._chunk,
                threads=self._threads,
            )

            def on_step(iteration: int, loss: float, wall_ms: float) -> None:
                self._log.log_step(iteration, loss, wall_ms, config.seed)

            def on_checkpoint(current: FinetuneSession, score: Optional[float]) -> None:
                if score is not None:
                    self._log.log_metric(current.iteration, score)
                self._checkpoint_repo.save(
                    checkpoint, session_entries(current, options), config.float_width
                )

            self._log.open(command.out / LOG_NAME)
            try:
                finetuner.run(session, command.iterations, on_step, on_checkpoint)
            finally:
                self._log.close()
        logger.info(f"Fine-tuned {dataset.name} for {command.iterations} iterations")
        return FinetuneResult(
            session=session, checkpoint=checkpoint, metric_log=list(session.metric_log)
        )
