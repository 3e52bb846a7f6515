# flake8: noqa

from src.application.ports.secondary.metrics_table_port import MetricsTablePort

__all__ = ["MetricsTablePort"]
