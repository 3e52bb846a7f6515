"""Per-view evaluation rows and the aggregated report."""

from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

CSV_COLUMNS = ("view", "psnr", "ssim", "abs_err", "acc_0.01", "acc_0.05", "depth_pixels")


class ViewMetrics(BaseModel):
    """Quality of one rendered view against its reference."""

    view: str = Field(..., description="View identifier (file stem)")
    psnr: float = Field(..., description="PSNR in dB, capped at 99")
    ssim: Optional[float] = Field(default=None, description="Mean SSIM; None for tiny images")
    abs_err: Optional[float] = Field(default=None, description="Mean absolute depth error")
    acc_01: Optional[float] = Field(default=None, description="Fraction of depths within 0.01")
    acc_05: Optional[float] = Field(default=None, description="Fraction of depths within 0.05")
    depth_pixels: int = Field(default=0, ge=0, description="Pixels covered by the depth mask")

    def csv_row(self) -> list[str]:
        def fmt(value: Optional[float]) -> str:
            return "n/a" if value is None else f"{value:.6f}"

        return [
            self.view,
            fmt(self.psnr),
            fmt(self.ssim),
            fmt(self.abs_err),
            fmt(self.acc_01),
            fmt(self.acc_05),
            str(self.depth_pixels),
        ]


def _mean(values: list[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


class EvaluationReport(BaseModel):
    """All evaluated views plus their means."""

    views: list[ViewMetrics] = Field(default_factory=list, description="Per-view metrics")

    @property
    def mean_psnr(self) -> Optional[float]:
        return _mean([v.psnr for v in self.views])

    @property
    def mean_ssim(self) -> Optional[float]:
        return _mean([v.ssim for v in self.views])

    @property
    def mean_abs_err(self) -> Optional[float]:
        return _mean([v.abs_err for v in self.views])

    @property
    def mean_acc_01(self) -> Optional[float]:
        return _mean([v.acc_01 for v in self.views])

    @property
    def mean_acc_05(self) -> Optional[float]:
        return _mean([v.acc_05 for v in self.views])

    def summary(self) -> str:
        """Human-readable table of the means."""

        def fmt(value: Optional[float], unit: str = "") -> str:
            return "n/a" if value is None else f"{value:.4f}{unit}"

        lines = [
            f"Evaluated {len(self.views)} view(s)",
            f"  PSNR      {fmt(self.mean_psnr, ' dB')}",
            f"  SSIM      {fmt(self.mean_ssim)}",
            f"  Abs err   {fmt(self.mean_abs_err)}",
            f"  Acc(0.01) {fmt(self.mean_acc_01)}",
            f"  Acc(0.05) {fmt(self.mean_acc_05)}",
        ]
        return "\n".join(lines)
