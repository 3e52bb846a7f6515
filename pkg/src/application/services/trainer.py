"""
Across-scene training steps and per-scene fine-tuning.

Every step draws its randomness from a generator seeded with
(seed, iteration), so runs are reproducible and can resume mid-way.
"""

import logging
import time
from typing import Callable, Optional, Sequence

import numpy as np

from src.application.services.pipeline import (
    MLP_PREFIX,
    MVSPipeline,
    PipelineOptions,
    detach_volume,
)
from src.domain.autodiff import (
    Parameter,
    Tensor,
    adam_step,
    backward,
    clip_grad_norm,
    current_tape,
    no_grad,
)
from src.domain.model.camera.camera import Camera, RayBatch
from src.domain.model.scene.scene_sample import SceneSample, SceneView
from src.domain.model.training.train_config import FinetuneSession, TrainConfig
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.networks.radiance_mlp import RadianceMLP
from src.domain.services.encoding import append_voxel_colors, pad_volume
from src.domain.services.geometry import generate_rays
from src.domain.services.losses import rendering_loss
from src.domain.services.metrics import psnr
from src.domain.services.neural_field import NeuralField
from src.domain.services.renderer import render_image, render_rays
from src.domain.shared_kernel import FinetuneStateError

logger = logging.getLogger(__name__)

VOLUME_FEATURES = "volume.features"
VOLUME_COLORS = "volume.colors"
SCRATCH_FEATURE_STD = 0.01


def step_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng([seed, iteration])


def sample_pixels(
    rng: np.random.Generator, width: int, height: int, count: int
) -> np.ndarray:
    """Distinct random (x, y) pixels; all of them when `count` covers the image."""
    total = width * height
    flat = rng.choice(total, size=min(count, total), replace=False)
    return np.stack([flat % width, flat // width], axis=-1).astype(np.float64)


def target_rays(
    ref: Camera, target: Camera, image: np.ndarray, count: int, rng: np.random.Generator
) -> RayBatch:
    pixels = sample_pixels(rng, target.width, target.height, count)
    xs, ys = pixels[:, 0].astype(int), pixels[:, 1].astype(int)
    return generate_rays(ref, target, pixels, image[ys, xs])


def train_step(
    pipeline: MVSPipeline,
    sample: SceneSample,
    config: TrainConfig,
    iteration: int = 0,
) -> float:
    """
    One end-to-end optimization step on a single target view.

    Runs extraction, plane sweep, encoding and volume rendering on
    `config.rays_per_batch` random target pixels, back-propagates the color
    MSE into every network and applies one Adam update to all parameters.
    """
    current_tape().clear()
    rng = step_rng(config.seed, iteration)
    pipeline.train()
    volume = pipeline.build_volume(sample.input_images, sample.input_cameras)
    field = pipeline.field(volume, sample.input_images, sample.input_cameras)
    rays = target_rays(
        sample.reference, sample.target_camera, sample.target_image, config.rays_per_batch, rng
    )
    result = pipeline.render_rays(field, rays, config.n_samples, config.jitter, rng)
    loss = rendering_loss(result.color, rays.colors)
    backward(loss)
    params = pipeline.parameters()
    if config.grad_clip is not None:
        clip_grad_norm(params, config.grad_clip)
    adam_step(params, config.learning_rate_at(iteration))
    return loss.item()


def trainable_volume(volume: EncodingVolume) -> EncodingVolume:
    """Turn the features and appended colors of a volume into named parameters."""
    if not volume.has_colors:
        raise FinetuneStateError(
            "Fine-tuning needs a volume with appended voxel colors; append them first"
        )
    return volume.with_tensors(
        Parameter(volume.features.data, name=VOLUME_FEATURES),
        Parameter(volume.appended_colors.data, name=VOLUME_COLORS),
    )


def clone_mlp(mlp: RadianceMLP, rng: np.random.Generator, copy_weights: bool = True) -> RadianceMLP:
    width = mlp.embed.weight.shape[1]
    clone = RadianceMLP(
        rng,
        feature_channels=mlp.feature_channels,
        color_channels=mlp.color_channels,
        width=width,
        hidden_layers=len(mlp.hidden),
        position_freqs=mlp.position_freqs,
        direction_freqs=mlp.direction_freqs,
    )
    if copy_weights:
        clone.load_state_dict(mlp.state_dict())
    return clone


def start_finetune(
    pipeline: MVSPipeline,
    input_images: Sequence[np.ndarray],
    input_cameras: Sequence[Camera],
    config: TrainConfig,
    pad: int = 0,
    from_scratch: bool = False,
) -> FinetuneSession:
    """
    Predict the encoding volume with the trained networks, append the input
    colors at every voxel, optionally pad, and open a fine-tuning session.

    With `from_scratch` the predicted features and the MLP weights are
    replaced by a random initialization; the appended colors are kept.
    """
    with no_grad():
        pipeline.eval()
        volume = detach_volume(pipeline.build_volume(input_images, input_cameras))
        rng = np.random.default_rng(config.seed)
        mlp = clone_mlp(pipeline.mlp, rng, copy_weights=not from_scratch)
        if from_scratch:
            noise = rng.normal(0.0, SCRATCH_FEATURE_STD, size=volume.features.shape)
            volume = volume.with_tensors(Tensor(noise))
        volume = append_voxel_colors(
            volume, input_images, input_cameras, pipeline.options.parameterization
        )
        volume = pad_volume(volume, pad)
    # Frozen by name for this session only; the caller's pipeline is untouched.
    frozen = pipeline.cnn_parameter_names()
    logger.info(
        f"Fine-tuning session on volume {volume.spatial_shape} "
        f"({'from scratch' if from_scratch else 'from network prediction'}), pad={pad}"
    )
    return FinetuneSession(
        volume=trainable_volume(volume), mlp=mlp, config=config, frozen=frozen
    )


def named_session_parameters(session: FinetuneSession) -> list[tuple[str, Parameter]]:
    """Volume features, appended colors and MLP weights under their checkpoint names."""
    return [
        (VOLUME_FEATURES, session.volume.features),
        (VOLUME_COLORS, session.volume.appended_colors),
    ] + list(session.mlp.named_parameters(MLP_PREFIX))


def session_parameters(session: FinetuneSession) -> list[Parameter]:
    """Everything a fine-tuning step updates; never the frozen CNNs."""
    named = named_session_parameters(session)
    if any(name in session.frozen for name, _ in named):
        raise FinetuneStateError("A frozen parameter was scheduled for fine-tuning")
    return [p for _, p in named]


CheckpointHook = Callable[[FinetuneSession, Optional[float]], None]


class Finetuner:
    """
    Optimizes a session on rays drawn from the training views and reports
    PSNR on the held-out views at every checkpoint.
    """

    def __init__(
        self,
        options: PipelineOptions,
        train_views: Sequence[SceneView],
        test_views: Sequence[SceneView] = (),
        chunk: int = 4096,
        threads: int = 1,
    ):
        if not train_views:
            raise FinetuneStateError("Fine-tuning needs at least one training view")
        self._options = options
        self._train_views = list(train_views)
        self._test_views = list(test_views)
        self._chunk = chunk
        self._threads = threads

    def field(self, session: FinetuneSession) -> NeuralField:
        return NeuralField(
            volume=session.volume,
            mlp=session.mlp,
            parameterization=self._options.parameterization,
            include_pi=self._options.include_pi,
        )

    def draw_rays(self, session: FinetuneSession, rng: np.random.Generator) -> RayBatch:
        """Random rays spread uniformly over all pixels of all training views."""
        config = session.config
        views = rng.integers(len(self._train_views), size=config.rays_per_batch)
        batches = []
        for index in np.unique(views):
            view = self._train_views[int(index)]
            count = int((views == index).sum())
            batches.append(
                target_rays(session.volume.reference, view.camera, view.image, count, rng)
            )
        return RayBatch(
            origins=np.concatenate([b.origins for b in batches]),
            directions=np.concatenate([b.directions for b in batches]),
            pixels=np.concatenate([b.pixels for b in batches]),
            depth_scale=np.concatenate([b.depth_scale for b in batches]),
            colors=np.concatenate([b.colors for b in batches]),
        )

    def step(self, session: FinetuneSession) -> float:
        config = session.config
        current_tape().clear()
        rng = step_rng(config.seed, session.iteration)
        rays = self.draw_rays(session, rng)
        result = render_rays(
            self.field(session),
            rays,
            config.n_samples,
            config.jitter,
            rng,
            self._options.background.rgb,
            self._options.parameterization,
        )
        loss = rendering_loss(result.color, rays.colors)
        backward(loss)
        params = session_parameters(session)
        if config.grad_clip is not None:
            clip_grad_norm(params, config.grad_clip)
        adam_step(params, config.learning_rate_at(session.iteration))
        session.iteration += 1
        value = loss.item()
        session.loss_log.append((session.iteration, value))
        return value

    def render(self, session: FinetuneSession, camera: Camera) -> tuple[np.ndarray, ...]:
        return render_image(
            self.field(session),
            camera,
            chunk=self._chunk,
            n_samples=session.config.n_samples,
            seed=session.config.seed,
            background=self._options.background.rgb,
            parameterization=self._options.parameterization,
            threads=self._threads,
        )

    def evaluate(self, session: FinetuneSession) -> Optional[float]:
        """Mean PSNR over the held-out views, or None without any."""
        if not self._test_views:
            return None
        scores = [psnr(self.render(session, v.camera)[0], v.image) for v in self._test_views]
        value = float(np.mean(scores))
        session.metric_log.append((session.iteration, value))
        return value

    def run(
        self,
        session: FinetuneSession,
        iterations: int,
        on_step: Optional[Callable[[int, float, float], None]] = None,
        on_checkpoint: Optional[CheckpointHook] = None,
    ) -> FinetuneSession:
        """
        Run `iterations` steps. Checkpoints fire before the first step, every
        `checkpoint_interval` steps and after the last one.
        """
        interval = session.config.checkpoint_interval
        end = session.iteration + iterations

        def checkpoint() -> None:
            score = self.evaluate(session)
            if score is not None:
                logger.info(
                    f"Fine-tune iteration {session.iteration}: held-out PSNR {score:.2f} dB"
                )
            if on_checkpoint is not None:
                on_checkpoint(session, score)

        checkpoint()
        while session.iteration < end:
            started = time.perf_counter()
            loss = self.step(session)
            if on_step is not None:
                on_step(session.iteration, loss, (time.perf_counter() - started) * 1000.0)
            if session.iteration % interval == 0 or session.iteration == end:
                checkpoint()
        return session
