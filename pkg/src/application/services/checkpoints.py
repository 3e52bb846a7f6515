"""Conversion between pipelines or fine-tuning sessions and checkpoint entries."""

from dataclasses import dataclass
import logging
from typing import Iterable, Mapping, Optional

import numpy as np

from src.application.services.pipeline import MLP_PREFIX, MVSPipeline, PipelineOptions
from src.application.services.trainer import (
    VOLUME_COLORS,
    VOLUME_FEATURES,
    named_session_parameters,
)
from src.domain.autodiff import AdamState, Parameter, Tensor
from src.domain.model.camera.camera import Camera
from src.domain.model.training.train_config import FinetuneSession
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.networks.radiance_mlp import RadianceMLP
from src.domain.shared_kernel import SceneFormatError, ShapeMismatchError

logger = logging.getLogger(__name__)

VOLUME_MARGINS = "volume.margins"
VOLUME_SCALE = "volume.feature_scale"
REFERENCE_K = "volume.reference.K"
REFERENCE_R = "volume.reference.R"
REFERENCE_T = "volume.reference.t"
REFERENCE_RANGE = "volume.reference.range"
REFERENCE_SIZE = "volume.reference.size"
ITERATION = "session.iteration"
TRAIN_ITERATION = "train.iteration"
OPTIMIZER_PREFIX = "optim."


def is_session_checkpoint(entries: Mapping[str, np.ndarray]) -> bool:
    return VOLUME_FEATURES in entries


def optimizer_entries(named: Iterable[tuple[str, Parameter]]) -> dict[str, np.ndarray]:
    """Adam moments and step counter of every parameter, keyed `optim.<name>.{m,v,step}`."""
    entries = {}
    for name, param in named:
        state = param.adam_state
        key = f"{OPTIMIZER_PREFIX}{name}"
        entries[f"{key}.m"] = state.m.copy()
        entries[f"{key}.v"] = state.v.copy()
        entries[f"{key}.step"] = np.array([float(state.step)])
    return entries


def load_optimizer_state(
    named: Iterable[tuple[str, Parameter]], entries: Mapping[str, np.ndarray]
) -> int:
    """
    Restore the Adam state of every parameter that has one in `entries`.

    Parameters without stored state keep a fresh optimizer. Returns the
    number of parameters restored.
    """
    restored = 0
    for name, param in named:
        key = f"{OPTIMIZER_PREFIX}{name}"
        if f"{key}.m" not in entries:
            continue
        m = np.asarray(_require(entries, f"{key}.m"), dtype=param.data.dtype)
        v = np.asarray(_require(entries, f"{key}.v"), dtype=param.data.dtype)
        if m.shape != param.shape or v.shape != param.shape:
            raise ShapeMismatchError(f"Optimizer state of {name}", param.shape, m.shape)
        step = int(_require(entries, f"{key}.step").reshape(-1)[0])
        param.adam_state = AdamState(m=m.copy(), v=v.copy(), step=step)
        restored += 1
    logger.debug(f"Restored optimizer state of {restored} parameter(s)")
    return restored


def stored_iteration(entries: Mapping[str, np.ndarray], key: str) -> int:
    return int(entries[key].reshape(-1)[0]) if key in entries else 0


def pipeline_entries(pipeline: MVSPipeline, iteration: int = 0) -> dict[str, np.ndarray]:
    """Network weights plus the optimizer state needed to resume training."""
    entries = pipeline.state_dict()
    entries.update(optimizer_entries(pipeline.named_parameters()))
    entries[TRAIN_ITERATION] = np.array([float(iteration)])
    return entries


def session_entries(session: FinetuneSession, options: PipelineOptions) -> dict[str, np.ndarray]:
    """Everything needed to render a fine-tuned scene without its input images."""
    volume = session.volume
    ref = volume.reference
    entries = options.as_entries()
    entries.update(session.mlp.state_dict(MLP_PREFIX))
    entries[VOLUME_FEATURES] = volume.features.data.copy()
    entries[VOLUME_COLORS] = volume.appended_colors.data.copy()
    entries[VOLUME_MARGINS] = np.asarray(volume.margins, dtype=np.float64)
    entries[VOLUME_SCALE] = np.array([volume.feature_scale])
    entries[REFERENCE_K] = ref.K.copy()
    entries[REFERENCE_R] = ref.R.copy()
    entries[REFERENCE_T] = ref.t.copy()
    entries[REFERENCE_RANGE] = np.array([ref.near, ref.far])
    entries[REFERENCE_SIZE] = np.array([ref.width, ref.height], dtype=np.float64)
    entries[ITERATION] = np.array([float(session.iteration)])
    entries.update(optimizer_entries(named_session_parameters(session)))
    return entries


@dataclass
class RestoredSession:
    volume: EncodingVolume
    mlp: RadianceMLP
    options: PipelineOptions
    iteration: int


def nearest_rotation(R: np.ndarray) -> np.ndarray:
    """Closest orthonormal matrix; 32-bit checkpoints round R off its manifold."""
    u, _, vt = np.linalg.svd(R)
    return u @ vt


def _require(entries: Mapping[str, np.ndarray], key: str) -> np.ndarray:
    if key not in entries:
        raise SceneFormatError(f"Checkpoint entry {key} is missing")
    return np.asarray(entries[key], dtype=np.float64)


def restore_session(
    entries: Mapping[str, np.ndarray], fallback: Optional[PipelineOptions] = None
) -> RestoredSession:
    """Rebuild the encoding volume and MLP of a fine-tuned checkpoint."""
    options = PipelineOptions.from_entries(entries, fallback)
    near, far = _require(entries, REFERENCE_RANGE).reshape(-1)[:2]
    width, height = (int(v) for v in _require(entries, REFERENCE_SIZE).reshape(-1)[:2])
    reference = Camera(
        K=_require(entries, REFERENCE_K),
        R=nearest_rotation(_require(entries, REFERENCE_R)),
        t=_require(entries, REFERENCE_T),
        near=float(near),
        far=float(far),
        width=width,
        height=height,
    )
    volume = EncodingVolume(
        features=Tensor(_require(entries, VOLUME_FEATURES)),
        reference=reference,
        appended_colors=Tensor(_require(entries, VOLUME_COLORS)),
        margins=tuple(int(m) for m in _require(entries, VOLUME_MARGINS)),
        feature_scale=float(_require(entries, VOLUME_SCALE).reshape(-1)[0]),
    )
    mlp = options.build_mlp(np.random.default_rng(0))
    mlp.load_state_dict(entries, MLP_PREFIX)
    mlp.eval()
    return RestoredSession(
        volume=volume, mlp=mlp, options=options, iteration=stored_iteration(entries, ITERATION)
    )
