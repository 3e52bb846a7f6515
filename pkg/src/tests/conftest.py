"""Pytest configuration and shared fixtures for testing."""

from pathlib import Path

import numpy as np
import pytest

from src.application.services.pipeline import PipelineOptions
from src.application.use_cases.scenes import GenerateScenesCommand, GenerateScenesUseCase
from src.domain.autodiff import current_tape, set_default_dtype
from src.domain.model.enums import FloatWidth, SplitTag
from src.domain.model.scene.scene_sample import SceneSample
from src.domain.model.scene.toy_scene import ToyScene
from src.domain.model.training.train_config import TrainConfig
from src.domain.services.toy_scenes import RigView, camera_rig, generate_toy_scene, reference_render
from src.infrastructure.adapters.secondary.persistence import (
    FileImageRepository,
    FileSceneRepository,
)

# 48 px keeps the coarsest UNet level at 1×2×2 voxels, enough for train-mode statistics.
SIZE = 48
SCENE_SEED = 3
QUADRATURE = 16


@pytest.fixture(autouse=True)
def clean_autodiff_state():
    """Every test starts and ends with an empty tape at 64-bit width."""
    set_default_dtype(FloatWidth.FLOAT64)
    current_tape().clear()
    yield
    current_tape().clear()
    set_default_dtype(FloatWidth.FLOAT64)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


# --- Scene Fixtures ---


@pytest.fixture(scope="session")
def rig() -> list[RigView]:
    """The twenty-view camera rig at test resolution."""
    return camera_rig(SIZE, SIZE)


@pytest.fixture(scope="session")
def toy_scene() -> ToyScene:
    return generate_toy_scene(SCENE_SEED)


@pytest.fixture(scope="session")
def rig_renders(rig, toy_scene) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Reference (image, depth, alpha) of the inputs and the first fine-tuning view."""
    wanted = [v for v in rig if v.split is SplitTag.INPUT] + [
        next(v for v in rig if v.split is SplitTag.FINETUNE)
    ]
    return {v.view_id: reference_render(toy_scene, v.camera, QUADRATURE) for v in wanted}


@pytest.fixture
def scene_sample(rig, rig_renders) -> SceneSample:
    """Three input views plus one target view of the toy scene."""
    views = [v for v in rig if v.view_id in rig_renders]
    inputs, target = views[:3], views[3]
    return SceneSample(
        input_images=[rig_renders[v.view_id][0] for v in inputs],
        input_cameras=[v.camera for v in inputs],
        target_image=rig_renders[target.view_id][0],
        target_camera=target.camera,
    )


@pytest.fixture
def scene_dir(tmp_path) -> Path:
    """One generated scene directory at test resolution."""
    use_case = GenerateScenesUseCase(FileSceneRepository(FileImageRepository()))
    manifests = use_case.execute(
        GenerateScenesCommand(
            out=tmp_path / "scenes",
            count=1,
            seed=SCENE_SEED,
            width=SIZE,
            height=SIZE,
            n_quadrature=QUADRATURE,
        )
    )
    return manifests[0].parent


# --- Pipeline Fixtures ---


@pytest.fixture
def tiny_options() -> PipelineOptions:
    """A narrow pipeline that still exercises every layer."""
    return PipelineOptions(
        feature_channels=8,
        encoding_channels=8,
        depth_planes=8,
        mlp_width=16,
        position_freqs=2,
        direction_freqs=1,
    )


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        rays_per_batch=32,
        learning_rate=1e-3,
        iterations=2,
        n_samples=8,
        depth_planes=8,
        checkpoint_interval=1,
        seed=0,
    )
