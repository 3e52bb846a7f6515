"""Enumerations for the application."""

from enum import Enum


class BatchNormMode(str, Enum):
    """Statistics source for batch normalization."""

    TRAIN = "train"
    EVAL = "eval"


class FloatWidth(int, Enum):
    """Numeric width of tensors, in bytes."""

    FLOAT32 = 4
    FLOAT64 = 8


class DepthParameterization(str, Enum):
    """How depth hypotheses and NDC depth are spaced between near and far."""

    LINEAR = "linear"
    DISPARITY = "disparity"


class Background(str, Enum):
    """Color behind the reference frustum."""

    BLACK = "black"
    WHITE = "white"

    @property
    def rgb(self) -> tuple[float, float, float]:
        return (1.0, 1.0, 1.0) if self is Background.WHITE else (0.0, 0.0, 0.0)


class SplitTag(str, Enum):
    """Role of a view inside a scene."""

    INPUT = "input"
    FINETUNE = "finetune"
    TEST = "test"
