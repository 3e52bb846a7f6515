from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np


class ImageRepository(ABC):
    """Repository interface for color images and depth maps"""

    @abstractmethod
    def write_png(self, path: Path, image: np.ndarray) -> None:
        """Write an [H,W,3] image in [0,1] as 8-bit PNG"""
        pass

    @abstractmethod
    def read_png(self, path: Path) -> np.ndarray:
        """Read an 8-bit PNG as an [H,W,3] float image in [0,1]"""
        pass

    @abstractmethod
    def write_pfm(self, path: Path, data: np.ndarray) -> None:
        """Write an [H,W] or [H,W,3] float map"""
        pass

    @abstractmethod
    def read_pfm(self, path: Path) -> np.ndarray:
        """Read a float map written by `write_pfm` or any PFM producer"""
        pass
