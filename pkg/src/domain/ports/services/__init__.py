# flake8: noqa

from src.domain.ports.services.training_log_port import TrainingLogPort

__all__ = ["TrainingLogPort"]
