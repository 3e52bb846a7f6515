from abc import ABC, abstractmethod
from pathlib import Path
from typing import Mapping

import numpy as np

from src.domain.model.enums import FloatWidth


class CheckpointRepository(ABC):
    """Repository interface for named parameter arrays"""

    @abstractmethod
    def save(self, path: Path, entries: Mapping[str, np.ndarray], float_width: FloatWidth) -> None:
        """Write all entries atomically; arrays are stored at `float_width`"""
        pass

    @abstractmethod
    def load(self, path: Path) -> tuple[dict[str, np.ndarray], FloatWidth]:
        """Read every entry and the stored float width"""
        pass
