"""CSV training logs: one line per step, plus a sibling file of checkpoint PSNRs."""

import csv
import logging
from pathlib import Path
from typing import Optional, TextIO

from src.domain.ports.services.training_log_port import TrainingLogPort

logger = logging.getLogger(__name__)

STEP_HEADER = ("iteration", "loss", "wall_ms", "seed")
METRIC_HEADER = ("iteration", "psnr")


def metrics_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_psnr{path.suffix}")


class CsvTrainingLog(TrainingLogPort):
    """Flushes after every line so an interrupted run keeps its history"""

    def __init__(self) -> None:
        self._path: Optional[Path] = None
        self._steps: Optional[TextIO] = None
        self._metrics: Optional[TextIO] = None

    def open(self, path: Path) -> None:
        self.close()
        self._path = Path(path)
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._steps = self._path.open("w", newline="")
        csv.writer(self._steps).writerow(STEP_HEADER)
        self._steps.flush()

    def log_step(self, iteration: int, loss: float, wall_ms: float, seed: int) -> None:
        if self._steps is None:
            raise RuntimeError("Training log is not open")
        csv.writer(self._steps).writerow([iteration, repr(float(loss)), f"{wall_ms:.3f}", seed])
        self._steps.flush()

    def log_metric(self, iteration: int, psnr: float) -> None:
        if self._path is None:
            raise RuntimeError("Training log is not open")
        if self._metrics is None:
            self._metrics = metrics_path(self._path).open("w", newline="")
            csv.writer(self._metrics).writerow(METRIC_HEADER)
        csv.writer(self._metrics).writerow([iteration, f"{psnr:.6f}"])
        self._metrics.flush()

    def close(self) -> None:
        for stream in (self._steps, self._metrics):
            if stream is not None:
                stream.close()
        self._steps = self._metrics = None
