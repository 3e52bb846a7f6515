from abc import ABC, abstractmethod
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from src.domain.model.scene.scene_sample import SceneDataset
from src.domain.model.scene.toy_scene import ToyScene
from src.domain.services.toy_scenes import RigView


class SceneRepository(ABC):
    """Repository interface for scene directories"""

    @abstractmethod
    def save(
        self,
        root: Path,
        views: Sequence[RigView],
        images: Mapping[str, np.ndarray],
        depths: Mapping[str, np.ndarray],
        scene: Optional[ToyScene] = None,
    ) -> Path:
        """Write cameras, images, depths and the manifest; return the manifest path"""
        pass

    @abstractmethod
    def load(self, root: Path) -> SceneDataset:
        """Read the manifest and cameras; images load on first access"""
        pass

    @abstractmethod
    def load_toy_scene(self, root: Path) -> Optional[ToyScene]:
        """The scene description, when the directory was generated procedurally"""
        pass

    @abstractmethod
    def list_scenes(self, root: Path) -> list[Path]:
        """Scene directories below `root`, sorted by name"""
        pass
