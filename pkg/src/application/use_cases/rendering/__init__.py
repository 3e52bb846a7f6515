from src.application.use_cases.rendering.render_view import (
    RenderedView,
    RenderViewCommand,
    RenderViewUseCase,
)

__all__ = ["RenderViewCommand", "RenderViewUseCase", "RenderedView"]
