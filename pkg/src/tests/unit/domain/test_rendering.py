"""
Unit tests for the radiance field decoding and differentiable volume rendering.
"""

import importlib
import pkgutil
from dataclasses import dataclass

import numpy as np
import pytest

import src.domain.services as domain_services
from src.domain.autodiff import Tensor
from src.domain.autodiff import functional as F
from src.domain.model.camera.camera import Camera, NdcPoint, RayBatch
from src.domain.model.field.samples import PointQuery, VolumeSample
from src.domain.networks.radiance_mlp import RadianceMLP, encoded_width
from src.domain.services.geometry import generate_rays, pixel_grid
from src.domain.services.radiance_field import decode, gather_view_colors, positional_encode
from src.domain.services.renderer import composite, render_image, render_rays, sample_ray_points
from src.domain.services.toy_scenes import rig_camera
from src.domain.shared_kernel import ShapeMismatchError
from src.tests.gradcheck import check_gradients


@dataclass
class SlabField:
    """Density growing with NDC depth and color equal to the NDC position."""

    reference: Camera

    def evaluate(self, ndc: np.ndarray, directions: np.ndarray) -> VolumeSample:
        sigma = Tensor(4.0 * ndc[:, 2] + 0.5)
        radiance = Tensor(np.clip(ndc, 0.0, 1.0))
        return VolumeSample(sigma=sigma, radiance=radiance)


def forward_rays(ref: Camera, count: int) -> RayBatch:
    return generate_rays(ref, ref, pixel_grid(ref.width, ref.height)[:count])


@pytest.mark.unit
class TestPositionalEncoding:
    """Frequency expansion of positions and directions."""

    @pytest.mark.parametrize("n_freq,width", [(10, 63), (4, 27), (0, 3)])
    def test_widths(self, n_freq, width):
        out = positional_encode(np.zeros((5, 3)), n_freq)

        assert out.shape == (5, width)
        assert encoded_width(n_freq) == width

    def test_layout_keeps_raw_values_first(self):
        v = np.array([[0.1, 0.2, 0.3]])

        out = positional_encode(v, 2)

        np.testing.assert_array_equal(out[0, :3], v[0])
        np.testing.assert_allclose(out[0, 3:6], np.sin(v[0]))
        np.testing.assert_allclose(out[0, 6:9], np.sin(2.0 * v[0]))
        np.testing.assert_allclose(out[0, 9:12], np.cos(v[0]))

    def test_include_pi_scales_frequencies(self):
        v = np.array([[0.5, 0.0, 0.0]])

        out = positional_encode(v, 1, include_pi=True)

        assert out[0, 3] == pytest.approx(np.sin(0.5 * np.pi))


@pytest.mark.unit
class TestDecode:
    """The MLP's density and radiance heads."""

    def test_output_ranges(self, rng):
        mlp = RadianceMLP(rng, feature_channels=4, color_channels=9, width=16)
        k = 7
        query = PointQuery(
            x=NdcPoint.from_array(rng.uniform(size=(k, 3))),
            d=rng.normal(size=(k, 3)),
            f=Tensor(rng.normal(size=(k, 4))),
            c=Tensor(rng.uniform(size=(k, 9))),
        )

        sample = decode(query, mlp)

        assert sample.sigma.shape == (k,)
        assert sample.radiance.shape == (k, 3)
        assert np.all(sample.sigma.data >= 0.0)
        assert np.all((sample.radiance.data > 0.0) & (sample.radiance.data < 1.0))

    def test_query_components_must_align(self, rng):
        with pytest.raises(ShapeMismatchError):
            PointQuery(
                x=NdcPoint.from_array(np.zeros((3, 3))),
                d=np.zeros((2, 3)),
                f=Tensor(np.zeros((3, 4))),
                c=Tensor(np.zeros((3, 9))),
            )

    def test_default_input_width_is_features_plus_nine_colors(self, rng):
        mlp = RadianceMLP(rng)

        assert mlp.embed.weight.shape == (41, 256)
        assert mlp.position.weight.shape == (63, 256)
        assert mlp.view.weight.shape == (27 + 256, 256)

    def test_gather_colors_of_the_reference_view(self):
        ref = rig_camera(22.0, 0.0, 48, 48)
        others = [rig_camera(22.0, -16.0, 48, 48), rig_camera(22.0, 16.0, 48, 48)]
        image = np.random.default_rng(3).uniform(size=(48, 48, 3))
        ndc = np.array([[10.0 / 47.0, 20.0 / 47.0, 0.3], [0.5, 0.5, 0.9]])

        colors, behind = gather_view_colors(ndc, [image, image, image], [ref] + others)

        assert colors.shape == (2, 9)
        assert not behind.any()
        np.testing.assert_allclose(colors.data[0, :3], image[20, 10], atol=1e-9)

    def test_zero_network_gives_softplus_and_sigmoid_of_zero(self, rng):
        mlp = RadianceMLP(rng, feature_channels=4, color_channels=9, width=8)
        for param in mlp.parameters():
            param.assign(np.zeros_like(param.data))
        query = PointQuery(
            x=NdcPoint.from_array(rng.uniform(size=(5, 3))),
            d=rng.normal(size=(5, 3)),
            f=Tensor(rng.normal(size=(5, 4))),
            c=Tensor(rng.uniform(size=(5, 9))),
        )

        sample = decode(query, mlp)

        np.testing.assert_allclose(sample.sigma.data, np.log(2.0), rtol=1e-12)
        np.testing.assert_allclose(sample.radiance.data, 0.5, rtol=1e-12)

    def test_density_ignores_the_viewing_direction(self, rng):
        mlp = RadianceMLP(rng, feature_channels=4, color_channels=9, width=16)
        x = NdcPoint.from_array(rng.uniform(size=(6, 3)))
        f, c = Tensor(rng.normal(size=(6, 4))), Tensor(rng.uniform(size=(6, 9)))

        first = decode(PointQuery(x=x, d=rng.normal(size=(6, 3)), f=f, c=c), mlp)
        second = decode(PointQuery(x=x, d=rng.normal(size=(6, 3)), f=f, c=c), mlp)

        np.testing.assert_array_equal(first.sigma.data, second.sigma.data)
        assert not np.array_equal(first.radiance.data, second.radiance.data)

    def test_gradients_reach_the_features(self, rng):
        mlp = RadianceMLP(rng, feature_channels=3, color_channels=3, width=8, hidden_layers=2)
        x = NdcPoint.from_array(rng.uniform(size=(4, 3)))
        d = rng.normal(size=(4, 3))
        c = Tensor(rng.uniform(size=(4, 3)))
        w_sigma, w_rgb = rng.normal(size=4), rng.normal(size=(4, 3))

        def loss(f):
            sample = decode(PointQuery(x=x, d=d, f=f, c=c), mlp)
            return F.add(
                F.sum(F.mul(sample.sigma, w_sigma)), F.sum(F.mul(sample.radiance, w_rgb))
            )

        check_gradients(loss, rng.normal(size=(4, 3)), rtol=1e-4)


@pytest.mark.unit
class TestComposite:
    """Alpha compositing along rays."""

    def test_weights_and_residual_sum_to_one(self, rng):
        sigma = Tensor(rng.uniform(0.0, 5.0, size=(4, 6)))
        radiance = Tensor(rng.uniform(size=(4, 6, 3)))
        deltas = np.full((4, 6), 0.1)

        out = composite(VolumeSample(sigma=sigma, radiance=radiance), deltas)

        np.testing.assert_allclose(out.alpha.data + out.transmittance.data, 1.0, atol=1e-12)

    def test_opaque_sample_takes_all_weight(self):
        sigma = np.zeros((1, 4))
        sigma[0, 2] = 1e6
        radiance = np.tile(np.arange(4.0)[:, None] / 4.0, (1, 3))[None]
        depths = np.array([[2.0, 2.5, 3.0, 3.5]])

        out = composite(
            VolumeSample(sigma=Tensor(sigma), radiance=Tensor(radiance)),
            np.full((1, 4), 0.25),
            depths=depths,
        )

        np.testing.assert_allclose(out.color.data, [[0.5, 0.5, 0.5]])
        assert out.depth.data[0] == pytest.approx(3.0)
        assert out.alpha.data[0] == pytest.approx(1.0)

    def test_empty_space_shows_background(self):
        out = composite(
            VolumeSample(sigma=Tensor(np.zeros((2, 3))), radiance=Tensor(np.ones((2, 3, 3)))),
            np.full((2, 3), 0.3),
            background=(1.0, 1.0, 1.0),
        )

        np.testing.assert_array_equal(out.color.data, np.ones((2, 3)))
        np.testing.assert_array_equal(out.alpha.data, [0.0, 0.0])

    def test_misaligned_samples_rejected(self):
        with pytest.raises(ShapeMismatchError):
            composite(
                VolumeSample(sigma=Tensor(np.zeros((2, 3))), radiance=Tensor(np.ones((2, 3, 3)))),
                np.zeros((2, 4)),
            )

    def test_gradient_reaches_density(self):
        sigma = Tensor(np.array([[0.5, 1.0, 2.0]]), requires_grad=True)
        radiance = Tensor(np.full((1, 3, 3), 0.5))

        out = composite(VolumeSample(sigma=sigma, radiance=radiance), np.full((1, 3), 0.2))
        F.sum(out.color).backward()

        assert sigma.grad is not None and np.all(np.isfinite(sigma.grad))

    def test_two_unit_samples(self):
        """σ=1, δ=1 twice: weights 1−e⁻¹ and e⁻¹(1−e⁻¹)."""
        radiance = np.array([[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]])

        out = composite(
            VolumeSample(sigma=Tensor(np.ones((1, 2))), radiance=Tensor(radiance)),
            np.ones((1, 2)),
        )

        first = 1.0 - np.exp(-1.0)
        np.testing.assert_allclose(out.weights.data[0], [first, np.exp(-1.0) * first])
        np.testing.assert_allclose(out.color.data[0], [0.6321, 0.2325, 0.0], atol=1e-4)
        assert out.transmittance.data[0] == pytest.approx(np.exp(-2.0))


@pytest.mark.unit
class TestQuadrature:
    """Midpoint quadrature converges to the continuous transmittance."""

    def test_error_halves_when_samples_double(self):
        """A slab of density s starting at a random b: exact residual exp(−s(1−b))."""
        rng = np.random.default_rng(11)
        s = 3.0
        starts = rng.uniform(0.05, 0.95, size=4000)
        exact = np.exp(-s * (1.0 - starts))

        errors = []
        for n in (64, 128, 256):
            midpoints = (np.arange(n) + 0.5) / n
            sigma = np.where(midpoints[None, :] >= starts[:, None], s, 0.0)
            radiance = np.zeros(sigma.shape + (3,))
            out = composite(
                VolumeSample(sigma=Tensor(sigma), radiance=Tensor(radiance)),
                np.full(sigma.shape, 1.0 / n),
            )
            errors.append(np.abs(out.transmittance.data - exact).mean())

        ratios = [errors[0] / errors[1], errors[1] / errors[2]]
        assert all(1.4 <= r <= 2.6 for r in ratios), ratios


@pytest.mark.unit
class TestRaySampling:
    """Stratified sample placement."""

    def test_midpoints_cover_the_slab(self):
        ref = rig_camera(22.0, 0.0, 16, 16)
        rays = forward_rays(ref, 5)

        plan = sample_ray_points(rays, ref, 4)

        np.testing.assert_allclose(plan.zn[0], [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(plan.deltas, 0.25)
        np.testing.assert_allclose(plan.points[..., 2], 2.1 + plan.zn * 1.8)
        assert not plan.empty.any()

    def test_jittered_samples_stay_in_their_strata(self):
        ref = rig_camera(22.0, 0.0, 16, 16)
        rays = forward_rays(ref, 5)

        plan = sample_ray_points(rays, ref, 8, jitter=True, rng=np.random.default_rng(0))

        strata = np.floor(plan.zn * 8)
        np.testing.assert_array_equal(strata, np.broadcast_to(np.arange(8), plan.zn.shape))

    def test_needs_two_samples(self):
        ref = rig_camera(22.0, 0.0, 16, 16)

        with pytest.raises(ShapeMismatchError):
            sample_ray_points(forward_rays(ref, 1), ref, 1)

    def test_rays_missing_the_slab_report_far_depth(self):
        ref = rig_camera(22.0, 0.0, 16, 16)
        rays = RayBatch(
            origins=np.zeros((1, 3)),
            directions=np.array([[0.0, 0.0, -1.0]]),
            pixels=np.zeros((1, 2)),
            depth_scale=np.ones(1),
        )

        result = render_rays(SlabField(ref), rays, 4)

        assert result.plan.empty[0]
        assert result.depth.data[0] == ref.far
        assert result.alpha.data[0] == 0.0


@pytest.mark.unit
class TestRenderImage:
    """Chunked full-image rendering."""

    def test_chunking_and_threads_do_not_change_the_image(self):
        ref = rig_camera(22.0, 0.0, 16, 16)
        target = rig_camera(32.0, 16.0, 16, 16)
        field = SlabField(ref)

        whole = render_image(field, target, chunk=4096, n_samples=6)
        pieces = render_image(field, target, chunk=7, n_samples=6, threads=3)

        for a, b in zip(whole, pieces):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_jitter_is_seeded(self):
        ref = rig_camera(22.0, 0.0, 16, 16)
        field = SlabField(ref)

        first = render_image(field, ref, chunk=50, n_samples=6, seed=4, jitter=True)
        second = render_image(field, ref, chunk=50, n_samples=6, seed=4, jitter=True)
        other = render_image(field, ref, chunk=50, n_samples=6, seed=5, jitter=True)

        np.testing.assert_array_equal(first[0], second[0])
        assert not np.array_equal(first[0], other[0])

    def test_output_shapes(self):
        ref = rig_camera(22.0, 0.0, 16, 12)

        image, depth, alpha = render_image(SlabField(ref), ref, n_samples=4)

        assert image.shape == (12, 16, 3)
        assert depth.shape == alpha.shape == (12, 16)
        assert np.all((depth >= ref.near) & (depth <= ref.far))

    def test_chunk_must_be_positive(self):
        ref = rig_camera(22.0, 0.0, 16, 16)

        with pytest.raises(ShapeMismatchError):
            render_image(SlabField(ref), ref, chunk=0)


@pytest.mark.unit
class TestServiceModuleDocs:
    """Every numerical service module states what it computes."""

    @pytest.mark.parametrize(
        "name", [m.name for m in pkgutil.iter_modules(domain_services.__path__)]
    )
    def test_module_has_a_docstring(self, name):
        module = importlib.import_module(f"{domain_services.__name__}.{name}")

        assert module.__doc__ and module.__doc__.strip()
