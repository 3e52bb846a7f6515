"""
Scene directories on disk.

    <scene>/manifest.txt      "size W H", then one line per view:
                              view_id camera_file image_file depth_file split
    <scene>/cameras/<id>.txt  three K rows, three [R|t] rows, "near far"
    <scene>/images/<id>.png
    <scene>/depths/<id>.pfm   camera-space depth, 0 where no surface
    <scene>/scene.json        toy-scene description, when generated

A depth file of "-" means the view has none.
"""

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from src.application.schemas.scene import ToySceneSchema
from src.domain.model.camera.camera import Camera
from src.domain.model.enums import SplitTag
from src.domain.model.scene.scene_sample import SceneDataset, SceneView
from src.domain.model.scene.toy_scene import ToyScene
from src.domain.ports.repositories.image_repository import ImageRepository
from src.domain.ports.repositories.scene_repository import SceneRepository
from src.domain.services.toy_scenes import RigView
from src.domain.shared_kernel import DomainException, SceneFormatError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"
SCENE_JSON = "scene.json"
NO_FILE = "-"


def format_camera(camera: Camera) -> str:
    rows = [camera.K[i] for i in range(3)]
    rows += [np.append(camera.R[i], camera.t[i]) for i in range(3)]
    lines = [" ".join(f"{v:.17g}" for v in row) for row in rows]
    lines.append(f"{camera.near:.17g} {camera.far:.17g}")
    return "\n".join(lines) + "\n"


def parse_camera(text: str, width: int, height: int, source: str = "camera") -> Camera:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    try:
        if len(rows) != 7 or [len(r) for r in rows] != [3, 3, 3, 4, 4, 4, 2]:
            raise ValueError(f"expected 3+3+1 rows of 3/4/2 values, got {[len(r) for r in rows]}")
        K = np.array(rows[:3], dtype=np.float64)
        Rt = np.array(rows[3:6], dtype=np.float64)
        near, far = (float(v) for v in rows[6])
    except ValueError as e:
        raise SceneFormatError(f"Malformed {source}: {e}") from e
    return Camera(K=K, R=Rt[:, :3], t=Rt[:, 3], near=near, far=far, width=width, height=height)


class FileSceneRepository(SceneRepository):
    """Scene directories with a text manifest, camera files, PNG images and PFM depths"""

    def __init__(self, image_repository: ImageRepository):
        self._images = image_repository

    def save(
        self,
        root: Path,
        views: Sequence[RigView],
        images: Mapping[str, np.ndarray],
        depths: Mapping[str, np.ndarray],
        scene: Optional[ToyScene] = None,
    ) -> Path:
        root = Path(root)
        (root / "cameras").mkdir(parents=True, exist_ok=True)
        if not views:
            raise SceneFormatError("A scene needs at least one view")
        width, height = views[0].camera.width, views[0].camera.height
        lines = [f"size {width} {height}"]
        for view in views:
            camera_file = f"cameras/{view.view_id}.txt"
            image_file = f"images/{view.view_id}.png"
            depth_file = f"depths/{view.view_id}.pfm" if view.view_id in depths else NO_FILE
            (root / camera_file).write_text(format_camera(view.camera))
            self._images.write_png(root / image_file, images[view.view_id])
            if depth_file != NO_FILE:
                self._images.write_pfm(root / depth_file, depths[view.view_id])
            fields = (view.view_id, camera_file, image_file, depth_file, view.split.value)
            lines.append(" ".join(fields))
        if scene is not None:
            description = ToySceneSchema.from_domain(scene).model_dump_json(indent=2)
            (root / SCENE_JSON).write_text(description)
        manifest = root / MANIFEST_NAME
        manifest.write_text("\n".join(lines) + "\n")
        logger.debug(f"Wrote {len(views)} views to {root}")
        return manifest

    def load(self, root: Path) -> SceneDataset:
        root = Path(root)
        manifest = root / MANIFEST_NAME if root.is_dir() else root
        root = manifest.parent
        if not manifest.is_file():
            raise SceneFormatError(f"No manifest at {manifest}")
        width = height = None
        views = []
        for number, raw in enumerate(manifest.read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if fields[0] == "size":
                if len(fields) != 3:
                    raise SceneFormatError(f"{manifest}:{number}: size needs width and height")
                width, height = int(fields[1]), int(fields[2])
                continue
            if width is None:
                raise SceneFormatError(f"{manifest}:{number}: view listed before the size line")
            if len(fields) != 5:
                raise SceneFormatError(f"{manifest}:{number}: expected 5 fields, got {len(fields)}")
            view_id, camera_file, image_file, depth_file, split = fields
            try:
                tag = SplitTag(split)
            except ValueError as e:
                raise SceneFormatError(f"{manifest}:{number}: unknown split {split!r}") from e
            camera_path = root / camera_file
            if not camera_path.is_file():
                raise SceneFormatError(f"{manifest}:{number}: missing camera file {camera_file}")
            camera = parse_camera(camera_path.read_text(), width, height, str(camera_path))
            views.append(
                SceneView(
                    view_id=view_id,
                    camera=camera,
                    split=tag,
                    image_source=self._loader(root / image_file, self._images.read_png),
                    depth_source=(
                        None
                        if depth_file == NO_FILE
                        else self._loader(root / depth_file, self._images.read_pfm)
                    ),
                )
            )
        if width is None:
            raise SceneFormatError(f"{manifest} has no size line")
        return SceneDataset(name=root.name, width=width, height=height, views=views)

    @staticmethod
    def _loader(path: Path, read):
        return lambda: read(path)

    def load_toy_scene(self, root: Path) -> Optional[ToyScene]:
        path = Path(root) / SCENE_JSON
        if not path.is_file():
            return None
        try:
            return ToySceneSchema.model_validate_json(path.read_text()).to_domain()
        except (ValidationError, DomainException) as e:
            raise SceneFormatError(f"Invalid scene description {path}: {e}") from e

    def list_scenes(self, root: Path) -> list[Path]:
        root = Path(root)
        if (root / MANIFEST_NAME).is_file():
            return [root]
        if not root.is_dir():
            return []
        return sorted(p for p in root.iterdir() if (p / MANIFEST_NAME).is_file())
