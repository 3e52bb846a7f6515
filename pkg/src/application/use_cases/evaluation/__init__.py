from src.application.use_cases.evaluation.evaluate_renders import (
    EvaluateRendersCommand,
    EvaluateRendersUseCase,
)

__all__ = ["EvaluateRendersCommand", "EvaluateRendersUseCase"]
