# flake8: noqa

from src.application.schemas.metrics import EvaluationReport, ViewMetrics
from src.application.schemas.scene import PrimitiveSchema, ToySceneSchema
from src.application.schemas.train import TrainConfigOverrides

__all__ = [
    "EvaluationReport",
    "PrimitiveSchema",
    "ToySceneSchema",
    "TrainConfigOverrides",
    "ViewMetrics",
]
