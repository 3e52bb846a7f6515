from src.application.use_cases.scenes.generate_scenes import (
    GenerateScenesCommand,
    GenerateScenesUseCase,
)

__all__ = ["GenerateScenesCommand", "GenerateScenesUseCase"]
