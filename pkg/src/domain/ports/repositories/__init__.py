# flake8: noqa

from src.domain.ports.repositories.checkpoint_repository import CheckpointRepository
from src.domain.ports.repositories.image_repository import ImageRepository
from src.domain.ports.repositories.scene_repository import SceneRepository

__all__ = [
    "CheckpointRepository",
    "ImageRepository",
    "SceneRepository",
]
