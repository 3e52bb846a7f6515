"""
Use case for scoring rendered views against reference images and depths.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from src.application.ports.secondary.metrics_table_port import MetricsTablePort
from src.application.schemas.metrics import EvaluationReport, ViewMetrics
from src.domain.ports.repositories.image_repository import ImageRepository
from src.domain.services.metrics import SSIM_WINDOW, depth_metrics, psnr, ssim
from src.domain.shared_kernel import SceneFormatError

logger = logging.getLogger(__name__)

IMAGE_SUFFIX = ".png"
DEPTH_SUFFIX = ".pfm"
TRUTH_IMAGE_DIR = "images"
TRUTH_DEPTH_DIR = "depths"


@dataclass
class EvaluateRendersCommand:
    """Command to compare every PNG in `pred_dir` with its namesake in `truth_dir`"""
    pred_dir: Path
    truth_dir: Path
    csv_path: Optional[Path] = None


def _first_existing(*candidates: Path) -> Optional[Path]:
    for path in candidates:
        if path.is_file():
            return path
    return None


class EvaluateRendersUseCase:
    """Use case for computing PSNR, SSIM and depth accuracy per view"""

    def __init__(self, image_repository: ImageRepository, metrics_table: MetricsTablePort):
        self._image_repo = image_repository
        self._table = metrics_table

    def execute(self, command: EvaluateRendersCommand) -> EvaluationReport:
        """
        Score every predicted view that has a reference.

        References are looked up next to the predictions' names, either
        directly in `truth_dir` or in its `images/` and `depths/` folders as
        written for generated scenes. Reference depths of zero mark pixels
        without a surface and are left out of the depth metrics.

        Args:
            command: EvaluateRendersCommand with both directories

        Returns:
            EvaluationReport with one row per view
        """
        predictions = sorted(command.pred_dir.glob(f"*{IMAGE_SUFFIX}"))
        rows = []
        for pred_path in predictions:
            stem = pred_path.stem
            truth_path = _first_existing(
                command.truth_dir / f"{stem}{IMAGE_SUFFIX}",
                command.truth_dir / TRUTH_IMAGE_DIR / f"{stem}{IMAGE_SUFFIX}",
            )
            if truth_path is None:
                logger.warning(f"No reference image for {stem}; skipped")
                continue
            rows.append(self._score(stem, pred_path, truth_path, command))
        if not rows:
            raise SceneFormatError(
                f"No predicted view in {command.pred_dir} has a reference in {command.truth_dir}"
            )
        report = EvaluationReport(views=rows)
        if command.csv_path is not None:
            self._table.write(command.csv_path, report)
        logger.info(f"Evaluated {len(rows)} view(s): mean PSNR {report.mean_psnr:.2f} dB")
        return report

    def _score(
        self, stem: str, pred_path: Path, truth_path: Path, command: EvaluateRendersCommand
    ) -> ViewMetrics:
        pred = self._image_repo.read_png(pred_path)
        truth = self._image_repo.read_png(truth_path)
        row = ViewMetrics(
            view=stem,
            psnr=psnr(pred, truth),
            ssim=ssim(pred, truth) if min(pred.shape[:2]) >= SSIM_WINDOW else None,
        )
        pred_depth_path = _first_existing(command.pred_dir / f"{stem}{DEPTH_SUFFIX}")
        truth_depth_path = _first_existing(
            command.truth_dir / f"{stem}{DEPTH_SUFFIX}",
            command.truth_dir / TRUTH_DEPTH_DIR / f"{stem}{DEPTH_SUFFIX}",
        )
        if pred_depth_path is None or truth_depth_path is None:
            return row
        pred_depth = self._image_repo.read_pfm(pred_depth_path)
        truth_depth = self._image_repo.read_pfm(truth_depth_path)
        depth = depth_metrics(pred_depth, truth_depth, np.asarray(truth_depth) > 0.0)
        return row.model_copy(
            update=dict(
                abs_err=depth.abs_err,
                acc_01=depth.acc_01,
                acc_05=depth.acc_05,
                depth_pixels=depth.count,
            )
        )
