"""
PNG and PFM files.

PFM stores 32-bit floats: a "PF" (color) or "Pf" (gray) line, a
"width height" line and a scale line whose sign gives the byte order
(negative means little-endian), followed by rows from bottom to top.
"""

import logging
from pathlib import Path

import numpy as np
from PIL import Image

from src.domain.ports.repositories.image_repository import ImageRepository
from src.domain.shared_kernel import SceneFormatError

logger = logging.getLogger(__name__)


class FileImageRepository(ImageRepository):
    """Pillow-backed PNG and hand-parsed PFM"""

    def write_png(self, path: Path, image: np.ndarray) -> None:
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 3 or image.shape[2] != 3:
            raise SceneFormatError(f"PNG images must be [H,W,3], got {image.shape}")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pixels = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
        Image.fromarray(pixels, mode="RGB").save(path, format="PNG")

    def read_png(self, path: Path) -> np.ndarray:
        path = Path(path)
        if not path.is_file():
            raise SceneFormatError(f"Image {path} does not exist")
        with Image.open(path) as image:
            pixels = np.asarray(image.convert("RGB"), dtype=np.float64)
        return pixels / 255.0

    def write_pfm(self, path: Path, data: np.ndarray) -> None:
        data = np.asarray(data, dtype="<f4")
        if data.ndim == 2:
            header = "Pf"
        elif data.ndim == 3 and data.shape[2] == 3:
            header = "PF"
        else:
            raise SceneFormatError(f"PFM maps must be [H,W] or [H,W,3], got {data.shape}")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        height, width = data.shape[:2]
        with path.open("wb") as stream:
            stream.write(f"{header}\n{width} {height}\n-1.0\n".encode("ascii"))
            stream.write(np.ascontiguousarray(data[::-1]).tobytes())

    def read_pfm(self, path: Path) -> np.ndarray:
        path = Path(path)
        if not path.is_file():
            raise SceneFormatError(f"Depth map {path} does not exist")
        with path.open("rb") as stream:
            header = stream.readline().strip()
            if header not in (b"PF", b"Pf"):
                raise SceneFormatError(f"{path} is not a PFM file (header {header!r})")
            try:
                width, height = (int(v) for v in stream.readline().split())
                scale = float(stream.readline().strip())
            except ValueError as e:
                raise SceneFormatError(f"Malformed PFM header in {path}") from e
            channels = 3 if header == b"PF" else 1
            dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
            count = width * height * channels
            data = np.frombuffer(stream.read(count * 4), dtype=dtype)
        if data.size != count:
            raise SceneFormatError(f"PFM payload of {path} is truncated")
        shape = (height, width, 3) if channels == 3 else (height, width)
        return data.reshape(shape)[::-1].astype(np.float64)
