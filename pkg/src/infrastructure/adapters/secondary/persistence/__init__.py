# flake8: noqa

from src.infrastructure.adapters.secondary.persistence.checkpoint_store import (
    BinaryCheckpointRepository,
)
from src.infrastructure.adapters.secondary.persistence.image_store import FileImageRepository
from src.infrastructure.adapters.secondary.persistence.scene_store import FileSceneRepository

__all__ = ["BinaryCheckpointRepository", "FileImageRepository", "FileSceneRepository"]
