"""
Binary checkpoint container.

Layout (little-endian): magic "MVSR", uint16 version, uint8 float width,
uint32 entry count, then per entry uint16 name length, UTF-8 name,
uint8 ndim, ndim × uint32 extents and the payload.
"""

import logging
import os
import struct
import tempfile
from pathlib import Path
from typing import BinaryIO, Mapping

import numpy as np

from src.domain.model.enums import FloatWidth
from src.domain.ports.repositories.checkpoint_repository import CheckpointRepository
from src.domain.shared_kernel import SceneFormatError

logger = logging.getLogger(__name__)

MAGIC = b"MVSR"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBI")
_DTYPES = {FloatWidth.FLOAT32: np.dtype("<f4"), FloatWidth.FLOAT64: np.dtype("<f8")}


def _read_exact(stream: BinaryIO, size: int, what: str) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise SceneFormatError(f"Checkpoint truncated while reading {what}")
    return data


class BinaryCheckpointRepository(CheckpointRepository):
    """Checkpoint files in the MVSR container format"""

    def save(self, path: Path, entries: Mapping[str, np.ndarray], float_width: FloatWidth) -> None:
        """Write all entries to a temporary file and move it over `path`"""
        width = FloatWidth(float_width)
        dtype = _DTYPES[width]
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as stream:
                stream.write(_HEADER.pack(MAGIC, FORMAT_VERSION, int(width), len(entries)))
                for name, array in entries.items():
                    encoded = name.encode("utf-8")
                    data = np.asarray(array, dtype=dtype)
                    stream.write(struct.pack("<H", len(encoded)))
                    stream.write(encoded)
                    stream.write(struct.pack("<B", data.ndim))
                    stream.write(struct.pack(f"<{data.ndim}I", *data.shape))
                    stream.write(np.ascontiguousarray(data).tobytes())
                stream.flush()
                os.fsync(stream.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        logger.info(f"Saved checkpoint with {len(entries)} entries to {path}")

    def load(self, path: Path) -> tuple[dict[str, np.ndarray], FloatWidth]:
        """Read every entry and the stored float width"""
        path = Path(path)
        if not path.is_file():
            raise SceneFormatError(f"Checkpoint {path} does not exist")
        with path.open("rb") as stream:
            magic, version, width_code, count = _HEADER.unpack(
                _read_exact(stream, _HEADER.size, "header")
            )
            if magic != MAGIC:
                raise SceneFormatError(f"{path} is not a checkpoint (magic {magic!r})")
            if version != FORMAT_VERSION:
                raise SceneFormatError(f"Unsupported checkpoint version {version}")
            try:
                width = FloatWidth(width_code)
            except ValueError as e:
                raise SceneFormatError(f"Unsupported float width {width_code}") from e
            dtype = _DTYPES[width]
            entries: dict[str, np.ndarray] = {}
            for _ in range(count):
                (length,) = struct.unpack("<H", _read_exact(stream, 2, "name length"))
                name = _read_exact(stream, length, "name").decode("utf-8")
                (ndim,) = struct.unpack("<B", _read_exact(stream, 1, f"{name} rank"))
                shape = struct.unpack(f"<{ndim}I", _read_exact(stream, 4 * ndim, f"{name} shape"))
                size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
                payload = _read_exact(stream, size, f"{name} payload")
                entries[name] = np.frombuffer(payload, dtype=dtype).reshape(shape).astype(
                    dtype.newbyteorder("=")
                )
            if stream.read(1):
                raise SceneFormatError(f"Trailing bytes after {count} entries in {path}")
        logger.debug(f"Loaded {len(entries)} entries from {path} at {int(width)}-byte width")
        return entries, width
