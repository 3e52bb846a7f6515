import csv
from pathlib import Path

from src.application.ports.secondary.metrics_table_port import MetricsTablePort
from src.application.schemas.metrics import CSV_COLUMNS, EvaluationReport, ViewMetrics


class CsvMetricsTable(MetricsTablePort):
    """Evaluation report as CSV with a trailing `mean` row"""

    def write(self, path: Path, report: EvaluationReport) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        means = ViewMetrics(
            view="mean",
            psnr=report.mean_psnr,
            ssim=report.mean_ssim,
            abs_err=report.mean_abs_err,
            acc_01=report.mean_acc_01,
            acc_05=report.mean_acc_05,
            depth_pixels=sum(v.depth_pixels for v in report.views),
        )
        with path.open("w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(CSV_COLUMNS)
            for row in report.views:
                writer.writerow(row.csv_row())
            writer.writerow(means.csv_row())
