from abc import ABC, abstractmethod
from pathlib import Path


class TrainingLogPort(ABC):
    """Append-only record of optimization progress"""

    @abstractmethod
    def open(self, path: Path) -> None:
        """Start a new log, replacing any existing file"""
        pass

    @abstractmethod
    def log_step(self, iteration: int, loss: float, wall_ms: float, seed: int) -> None:
        pass

    @abstractmethod
    def log_metric(self, iteration: int, psnr: float) -> None:
        """Held-out quality at a checkpoint"""
        pass

    @abstractmethod
    def close(self) -> None:
        pass
