"""
Use case for rendering views of a scene from a checkpoint.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

from src.application.services.checkpoints import is_session_checkpoint, restore_session
from src.application.services.pipeline import MVSPipeline, PipelineOptions
from src.domain.autodiff import default_float_width, no_grad
from src.domain.model.enums import SplitTag
from src.domain.model.scene.scene_sample import SceneDataset, SceneView
from src.domain.ports.repositories.checkpoint_repository import CheckpointRepository
from src.domain.ports.repositories.image_repository import ImageRepository
from src.domain.ports.repositories.scene_repository import SceneRepository
from src.domain.services.neural_field import NeuralField
from src.domain.services.renderer import render_image

logger = logging.getLogger(__name__)

ALL_VIEWS = "all"


@dataclass
class RenderViewCommand:
    """Command to render one view, a split or every view of a scene"""
    checkpoint: Path
    scene: Path
    view: str
    out: Path
    n_samples: int = 128
    chunk: int = 4096
    seed: int = 0
    options: PipelineOptions = field(default_factory=PipelineOptions)


@dataclass
class RenderedView:
    view_id: str
    image_path: Path
    depth_path: Path


def select_views(dataset: SceneDataset, selector: str) -> list[SceneView]:
    """A view id, a split name (`input`, `finetune`, `test`) or `all`."""
    if selector == ALL_VIEWS:
        return list(dataset.views)
    if selector in {tag.value for tag in SplitTag}:
        return dataset.split(SplitTag(selector))
    return [dataset.view(selector)]


class RenderViewUseCase:
    """Use case for writing rendered color (PNG) and depth (PFM) images"""

    def __init__(
        self,
        scene_repository: SceneRepository,
        checkpoint_repository: CheckpointRepository,
        image_repository: ImageRepository,
        threads: int = 1,
    ):
        self._scene_repo = scene_repository
        self._checkpoint_repo = checkpoint_repository
        self._image_repo = image_repository
        self._threads = threads

    def execute(self, command: RenderViewCommand) -> list[RenderedView]:
        """
        Render the selected views.

        Fine-tuned checkpoints render from their stored volume alone; the
        scene directory then only supplies target cameras. Trained network
        checkpoints build the volume from the scene's input images.

        Args:
            command: RenderViewCommand with checkpoint, scene and view selector

        Returns:
            Written image and depth paths per view
        """
        entries, width = self._checkpoint_repo.load(command.checkpoint)
        dataset = self._scene_repo.load(command.scene)
        targets = select_views(dataset, command.view)
        with default_float_width(width), no_grad():
            field_, options = self._field(entries, dataset, command.options)
            rendered = []
            for view in targets:
                image, depth, _ = render_image(
                    field_,
                    view.camera,
                    chunk=command.chunk,
                    n_samples=command.n_samples,
                    seed=command.seed,
                    background=options.background.rgb,
                    parameterization=options.parameterization,
                    threads=self._threads,
                )
                image_path = command.out / f"{view.view_id}.png"
                depth_path = command.out / f"{view.view_id}.pfm"
                self._image_repo.write_png(image_path, image)
                self._image_repo.write_pfm(depth_path, depth)
                rendered.append(RenderedView(view.view_id, image_path, depth_path))
                logger.info(f"Rendered {view.view_id} of {dataset.name} to {image_path}")
        return rendered

    @staticmethod
    def _field(entries, dataset: SceneDataset, fallback: PipelineOptions):
        if is_session_checkpoint(entries):
            restored = restore_session(entries, fallback)
            field_ = NeuralField(
                volume=restored.volume,
                mlp=restored.mlp,
                parameterization=restored.options.parameterization,
                include_pi=restored.options.include_pi,
            )
            return field_, restored.options
        pipeline = MVSPipeline.from_state(entries, fallback).eval()
        inputs = dataset.input_views
        images = [v.image for v in inputs]
        cameras = [v.camera for v in inputs]
        volume = pipeline.build_volume(images, cameras)
        return pipeline.field(volume, images, cameras), pipeline.options
