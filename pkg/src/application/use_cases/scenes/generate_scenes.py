"""
Use case for generating a pool of procedural toy scenes.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.domain.model.enums import Background
from src.domain.ports.repositories.scene_repository import SceneRepository
from src.domain.services.toy_scenes import (
    DEFAULT_HEIGHT,
    DEFAULT_WIDTH,
    RigView,
    camera_rig,
    generate_toy_scene,
    reference_render,
)

logger = logging.getLogger(__name__)

COVERAGE_THRESHOLD = 0.5


@dataclass
class GenerateScenesCommand:
    """Command to generate and render toy scenes"""
    out: Path
    count: int
    seed: int = 0
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    n_quadrature: int = 1024
    ground: bool = True
    emitter: bool = False
    background: Background = Background.BLACK


def masked_depth(depth: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Depth where a surface covers the pixel, zero elsewhere."""
    return np.where(alpha >= COVERAGE_THRESHOLD, depth, 0.0)


class GenerateScenesUseCase:
    """Use case for writing scene directories with oracle images and depths"""

    def __init__(self, scene_repository: SceneRepository, threads: int = 1):
        self._scene_repo = scene_repository
        self._threads = max(1, threads)

    def execute(self, command: GenerateScenesCommand) -> list[Path]:
        """
        Generate `count` scenes with consecutive seeds.

        Args:
            command: GenerateScenesCommand with pool size, seed and resolution

        Returns:
            Manifest paths of the written scenes
        """
        rig = camera_rig(command.width, command.height)
        manifests = []
        for offset in range(command.count):
            scene = generate_toy_scene(
                command.seed + offset,
                ground=command.ground,
                emitter=command.emitter,
                background=command.background,
            )

            def render(view: RigView):
                return reference_render(scene, view.camera, command.n_quadrature)

            if self._threads > 1:
                with ThreadPoolExecutor(max_workers=self._threads) as pool:
                    renders = list(pool.map(render, rig))
            else:
                renders = [render(view) for view in rig]
            images = {view.view_id: image for view, (image, _, _) in zip(rig, renders)}
            depths = {
                view.view_id: masked_depth(depth, alpha)
                for view, (_, depth, alpha) in zip(rig, renders)
            }
            manifest = self._scene_repo.save(command.out / scene.id, rig, images, depths, scene)
            logger.info(f"Generated {scene.id} with {len(scene.primitives)} primitives")
            manifests.append(manifest)
        return manifests
