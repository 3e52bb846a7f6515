"""
The generalizable reconstruction pipeline.

Holds the three networks (2D feature extractor, 3D encoding UNet, radiance
MLP) and chains them: images → feature maps → variance cost volume →
encoding volume → radiance field.
"""

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from src.domain.autodiff import Parameter, Tensor
from src.domain.autodiff import functional as F
from src.domain.model.camera.camera import Camera, RayBatch
from src.domain.model.enums import Background, DepthParameterization
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.model.volume.feature_map import FeatureMap
from src.domain.networks.encoding_net import EncodingUNet
from src.domain.networks.feature_extractor import FeatureExtractor
from src.domain.networks.radiance_mlp import RadianceMLP
from src.domain.services.encoding import encode_aligned
from src.domain.services.geometry import depth_hypotheses
from src.domain.services.neural_field import NeuralField
from src.domain.services.plane_sweep import build_cost_volume, image_tensor
from src.domain.services.renderer import RenderResult, render_image, render_rays
from src.domain.shared_kernel import ShapeMismatchError

logger = logging.getLogger(__name__)

FEATURE_PREFIX = "feature."
ENCODING_PREFIX = "encoding."
MLP_PREFIX = "mlp."
# Checkpoint entries that hold no network weights.
NON_NETWORK_PREFIXES = ("options.", "volume.", "session.", "optim.", "train.")
INPUT_VIEWS = 3


@dataclass(frozen=True)
class PipelineOptions:
    """Architecture and rendering hyperparameters of one pipeline instance."""

    feature_channels: int = 32
    encoding_channels: int = 32
    depth_planes: int = 128
    mlp_width: int = 256
    position_freqs: int = 10
    direction_freqs: int = 4
    include_pi: bool = False
    parameterization: DepthParameterization = DepthParameterization.LINEAR
    background: Background = Background.BLACK
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5

    @property
    def color_channels(self) -> int:
        return 3 * INPUT_VIEWS

    def build_mlp(self, rng: np.random.Generator) -> RadianceMLP:
        return RadianceMLP(
            rng,
            feature_channels=self.encoding_channels,
            color_channels=self.color_channels,
            width=self.mlp_width,
            position_freqs=self.position_freqs,
            direction_freqs=self.direction_freqs,
        )

    def as_entries(self) -> dict[str, np.ndarray]:
        """Scalar checkpoint entries describing the architecture."""
        values = {
            "feature_channels": self.feature_channels,
            "encoding_channels": self.encoding_channels,
            "depth_planes": self.depth_planes,
            "mlp_width": self.mlp_width,
            "position_freqs": self.position_freqs,
            "direction_freqs": self.direction_freqs,
            "include_pi": float(self.include_pi),
            "disparity": float(self.parameterization is DepthParameterization.DISPARITY),
            "white_background": float(self.background is Background.WHITE),
            "bn_momentum": self.bn_momentum,
            "bn_eps": self.bn_eps,
        }
        return {f"options.{k}": np.array([v], dtype=np.float64) for k, v in values.items()}

    @classmethod
    def from_entries(
        cls, entries: Mapping[str, np.ndarray], fallback: Optional["PipelineOptions"] = None
    ) -> "PipelineOptions":
        base = fallback or cls()

        def read(name: str, default: float) -> float:
            key = f"options.{name}"
            return float(entries[key].reshape(-1)[0]) if key in entries else default

        disparity = base.parameterization is DepthParameterization.DISPARITY
        white = base.background is Background.WHITE
        return cls(
            feature_channels=int(read("feature_channels", base.feature_channels)),
            encoding_channels=int(read("encoding_channels", base.encoding_channels)),
            depth_planes=int(read("depth_planes", base.depth_planes)),
            mlp_width=int(read("mlp_width", base.mlp_width)),
            position_freqs=int(read("position_freqs", base.position_freqs)),
            direction_freqs=int(read("direction_freqs", base.direction_freqs)),
            include_pi=bool(read("include_pi", float(base.include_pi))),
            parameterization=(
                DepthParameterization.DISPARITY
                if read("disparity", float(disparity))
                else DepthParameterization.LINEAR
            ),
            background=(
                Background.WHITE if read("white_background", float(white)) else Background.BLACK
            ),
            bn_momentum=read("bn_momentum", base.bn_momentum),
            bn_eps=read("bn_eps", base.bn_eps),
        )


class MVSPipeline:
    """
    Feature extractor, encoding UNet and radiance MLP with shared options.

    Parameter names carry a prefix per network (`feature.`, `encoding.`,
    `mlp.`) so a single checkpoint holds all of them.
    """

    def __init__(self, options: Optional[PipelineOptions] = None, seed: int = 0):
        self.options = options or PipelineOptions()
        rng = np.random.default_rng(seed)
        o = self.options
        self.extractor = FeatureExtractor(rng, o.feature_channels, o.bn_momentum, o.bn_eps)
        self.unet = EncodingUNet(
            rng,
            o.feature_channels + o.color_channels,
            o.encoding_channels,
            o.bn_momentum,
            o.bn_eps,
        )
        self.mlp = o.build_mlp(rng)

    # === Parameters and state ===

    def named_parameters(self) -> list[tuple[str, Parameter]]:
        return (
            list(self.extractor.named_parameters(FEATURE_PREFIX))
            + list(self.unet.named_parameters(ENCODING_PREFIX))
            + list(self.mlp.named_parameters(MLP_PREFIX))
        )

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def cnn_parameter_names(self) -> frozenset[str]:
        """Names of the extractor and UNet parameters, frozen while fine-tuning."""
        return frozenset(
            name
            for name, _ in self.named_parameters()
            if name.startswith((FEATURE_PREFIX, ENCODING_PREFIX))
        )

    def train(self) -> "MVSPipeline":
        for net in (self.extractor, self.unet, self.mlp):
            net.train()
        return self

    def eval(self) -> "MVSPipeline":
        for net in (self.extractor, self.unet, self.mlp):
            net.eval()
        return self

    def state_dict(self) -> dict[str, np.ndarray]:
        state = self.options.as_entries()
        state.update(self.extractor.state_dict(FEATURE_PREFIX))
        state.update(self.unet.state_dict(ENCODING_PREFIX))
        state.update(self.mlp.state_dict(MLP_PREFIX))
        return state

    def load_state_dict(self, state: Mapping[str, np.ndarray], strict: bool = True) -> None:
        networks = {k: v for k, v in state.items() if not k.startswith(NON_NETWORK_PREFIXES)}
        self.extractor.load_state_dict(networks, FEATURE_PREFIX, strict=False)
        self.unet.load_state_dict(networks, ENCODING_PREFIX, strict=False)
        self.mlp.load_state_dict(networks, MLP_PREFIX, strict=False)
        if strict:
            expected = set(self.extractor.state_dict(FEATURE_PREFIX))
            expected |= set(self.unet.state_dict(ENCODING_PREFIX))
            expected |= set(self.mlp.state_dict(MLP_PREFIX))
            missing = sorted(expected - set(networks))
            unexpected = sorted(set(networks) - expected)
            if missing or unexpected:
                raise ShapeMismatchError(
                    f"Checkpoint does not match the pipeline: missing {missing[:5]}, "
                    f"unexpected {unexpected[:5]}"
                )

    @classmethod
    def from_state(
        cls, state: Mapping[str, np.ndarray], fallback: Optional[PipelineOptions] = None
    ) -> "MVSPipeline":
        pipeline = cls(PipelineOptions.from_entries(state, fallback))
        pipeline.load_state_dict(state)
        return pipeline

    # === Forward ===

    def extract_features(self, images: Sequence[np.ndarray]) -> list[FeatureMap]:
        """Run the extractor on all views as one batch."""
        batch = F.stack([image_tensor(image) for image in images], axis=0)
        features = self.extractor(batch)
        h, w = images[0].shape[:2]
        return [
            FeatureMap(view_index=i, tensor=F.index(features, i), image_height=h, image_width=w)
            for i in range(len(images))
        ]

    def build_volume(
        self, images: Sequence[np.ndarray], cameras: Sequence[Camera]
    ) -> EncodingVolume:
        """Encoding volume of the reference frustum from the posed input views."""
        if len(images) != INPUT_VIEWS or len(cameras) != INPUT_VIEWS:
            raise ShapeMismatchError(
                "The pipeline takes three input views", INPUT_VIEWS, len(images)
            )
        ref = cameras[0]
        depths = depth_hypotheses(
            ref.near, ref.far, self.options.depth_planes, self.options.parameterization
        )
        features = self.extract_features(images)
        cost = build_cost_volume(features, images, cameras, depths)
        volume = encode_aligned(cost, self.unet)
        logger.debug(f"Encoding volume {volume.spatial_shape} from cost {cost.tensor.shape}")
        return volume

    def field(
        self,
        volume: EncodingVolume,
        images: Optional[Sequence[np.ndarray]] = None,
        cameras: Optional[Sequence[Camera]] = None,
        mlp: Optional[RadianceMLP] = None,
    ) -> NeuralField:
        return NeuralField(
            volume=volume,
            mlp=mlp or self.mlp,
            images=images,
            cameras=cameras,
            parameterization=self.options.parameterization,
            include_pi=self.options.include_pi,
        )

    def render_rays(
        self,
        field: NeuralField,
        rays: RayBatch,
        n_samples: int,
        jitter: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> RenderResult:
        return render_rays(
            field,
            rays,
            n_samples,
            jitter,
            rng,
            self.options.background.rgb,
            self.options.parameterization,
        )

    def render_view(
        self,
        field: NeuralField,
        target: Camera,
        n_samples: int,
        chunk: int = 4096,
        seed: int = 0,
        threads: int = 1,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Full-image render without jitter: (image, depth, alpha)."""
        return render_image(
            field,
            target,
            chunk=chunk,
            n_samples=n_samples,
            seed=seed,
            jitter=False,
            background=self.options.background.rgb,
            parameterization=self.options.parameterization,
            threads=threads,
        )


def detach_volume(volume: EncodingVolume) -> EncodingVolume:
    """Copy of a volume cut from any recorded graph."""
    colors = volume.appended_colors
    return volume.with_tensors(
        Tensor(volume.features.data),
        None if colors is None else Tensor(colors.data),
    )
