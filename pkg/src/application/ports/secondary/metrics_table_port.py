from abc import ABC, abstractmethod
from pathlib import Path

from src.application.schemas.metrics import EvaluationReport


class MetricsTablePort(ABC):
    """Destination of evaluation reports"""

    @abstractmethod
    def write(self, path: Path, report: EvaluationReport) -> None:
        """Write one row per view followed by a row of means"""
        pass
