import uuid
from abc import ABC
from dataclasses import dataclass, field
from typing import Any


@dataclass(kw_only=True)
class Entity(ABC):
    """
    Base class for Domain Entities.
    Entities have a unique identity that persists throughout their lifecycle.
    Equality is based on identity, not attributes.
    """

    id: str = field(default_factory=lambda: str(uuid.uuid4()))

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, self.__class__):
            return False
        return self.id == other.id

    def __hash__(self) -> int:
        return hash(self.id)


@dataclass(frozen=True, eq=False)
class ValueObject(ABC):
    """
    Base class for Value Objects.
    Value Objects are immutable and defined by their attributes.
    Array-valued subclasses compare by identity; use explicit tolerances instead.
    """
    pass


class DomainException(Exception):
    """Base exception for all domain errors."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ShapeMismatchError(DomainException):
    """Raised when tensor or volume extents are incompatible with an operation."""

    def __init__(self, message: str, expected=None, actual=None):
        if expected is not None or actual is not None:
            message = f"{message} (expected {expected}, got {actual})"
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class CameraError(DomainException):
    """Raised when a camera violates its invariants or a projection is undefined."""

    pass


class NonScalarLossError(DomainException):
    """Raised when backward is called on a tensor with more than one element."""

    pass


class FinetuneStateError(DomainException):
    """Raised when a fine-tuning session is started or mutated out of order."""

    pass


class SceneFormatError(DomainException):
    """Raised when a manifest, camera file, image, depth map or checkpoint cannot be parsed."""

    pass


class MetricError(DomainException):
    """Raised when image metrics are requested on incompatible inputs."""

    pass
