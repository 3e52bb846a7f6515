"""Posed views, scene datasets and single training instances."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from src.domain.model.camera.camera import Camera
from src.domain.model.enums import SplitTag
from src.domain.model.volume.feature_map import FEATURE_STRIDE
from src.domain.shared_kernel import CameraError, SceneFormatError, ShapeMismatchError, ValueObject

MIN_CENTER_SEPARATION = 1e-6
INPUT_VIEW_COUNT = 3


def check_image_size(height: int, width: int) -> None:
    if height % FEATURE_STRIDE or width % FEATURE_STRIDE:
        raise ShapeMismatchError(
            f"Image size must be divisible by {FEATURE_STRIDE}", "multiple of 4", (height, width)
        )


@dataclass(eq=False)
class SceneView:
    """
    One posed view of a scene.

    The image is loaded on first access through `image_source`, so views can
    be listed and rendered without their images being present.
    """

    view_id: str
    camera: Camera
    split: SplitTag
    image_source: Optional[Callable[[], np.ndarray]] = None
    depth_source: Optional[Callable[[], np.ndarray]] = None
    _image: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def image(self) -> np.ndarray:
        if self._image is None:
            if self.image_source is None:
                raise SceneFormatError(f"View {self.view_id} has no image")
            self._image = np.asarray(self.image_source(), dtype=np.float64)
        return self._image

    @property
    def depth(self) -> Optional[np.ndarray]:
        return None if self.depth_source is None else self.depth_source()


@dataclass(eq=False)
class SceneDataset:
    """
    Views of one scene with their split tags, in manifest order.

    The first input view is the reference view.
    """

    name: str
    width: int
    height: int
    views: list[SceneView]

    def __post_init__(self) -> None:
        check_image_size(self.height, self.width)
        for view in self.views:
            if (view.camera.width, view.camera.height) != (self.width, self.height):
                raise SceneFormatError(
                    f"View {view.view_id} is {view.camera.width}x{view.camera.height}, "
                    f"scene is {self.width}x{self.height}"
                )

    def split(self, tag: SplitTag) -> list[SceneView]:
        return [v for v in self.views if v.split is tag]

    @property
    def input_views(self) -> list[SceneView]:
        return self.split(SplitTag.INPUT)

    def view(self, view_id: str) -> SceneView:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise SceneFormatError(f"Scene {self.name} has no view {view_id}")

    def sample(self, target: SceneView) -> "SceneSample":
        inputs = self.input_views
        return SceneSample(
            input_images=[v.image for v in inputs],
            input_cameras=[v.camera for v in inputs],
            target_image=target.image,
            target_camera=target.camera,
        )


@dataclass(frozen=True, eq=False)
class SceneSample(ValueObject):
    """Three posed input images and one posed target image."""

    input_images: list[np.ndarray]
    input_cameras: list[Camera]
    target_image: np.ndarray
    target_camera: Camera

    def __post_init__(self) -> None:
        counts = (len(self.input_images), len(self.input_cameras))
        if counts != (INPUT_VIEW_COUNT, INPUT_VIEW_COUNT):
            raise ShapeMismatchError(
                "A scene sample needs three input views", INPUT_VIEW_COUNT, len(self.input_images)
            )
        for image, camera in zip(
            self.input_images + [self.target_image], self.input_cameras + [self.target_camera]
        ):
            if image.shape != (camera.height, camera.width, 3):
                raise ShapeMismatchError(
                    "Image does not match its camera", (camera.height, camera.width, 3), image.shape
                )
            check_image_size(camera.height, camera.width)
        centers = [c.center for c in self.input_cameras]
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                if np.linalg.norm(centers[i] - centers[j]) < MIN_CENTER_SEPARATION:
                    raise CameraError(f"Input cameras {i} and {j} have coincident centers")

    @property
    def reference(self) -> Camera:
        return self.input_cameras[0]
