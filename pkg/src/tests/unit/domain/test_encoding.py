"""
Unit tests for encoding volumes: construction, queries, color appending and padding.
"""

import numpy as np
import pytest

from src.domain.autodiff import Tensor
from src.domain.model.volume.cost_volume import CostVolume
from src.domain.model.volume.encoding_volume import EncodingVolume
from src.domain.networks.encoding_net import EncodingUNet
from src.domain.services.encoding import (
    append_voxel_colors,
    encode,
    encode_aligned,
    pad_volume,
    query,
)
from src.domain.services.geometry import depth_hypotheses
from src.domain.services.toy_scenes import rig_camera
from src.domain.shared_kernel import FinetuneStateError, ShapeMismatchError


@pytest.fixture
def reference():
    return rig_camera(22.0, 0.0, 48, 48)


@pytest.fixture
def volume(reference):
    """Random 3-channel features over a 5×12×12 grid."""
    features = np.random.default_rng(0).normal(size=(3, 5, 12, 12))
    return EncodingVolume(features=Tensor(features), reference=reference)


@pytest.mark.unit
class TestEncode:
    """Running the UNet on cost volumes."""

    def test_aligned_encoding_crops_back(self, reference, rng):
        net = EncodingUNet(rng, in_channels=4, out_channels=6).eval()
        depths = depth_hypotheses(reference.near, reference.far, 5)
        cost = CostVolume(
            tensor=Tensor(rng.normal(size=(4, 5, 12, 12))),
            depths=depths,
            reference=reference,
            variance_channels=1,
        )

        volume = encode_aligned(cost, net)

        assert volume.features.shape == (6, 5, 12, 12)
        assert volume.reference is reference
        assert not volume.has_colors

    def test_unaligned_encoding_rejected(self, reference, rng):
        net = EncodingUNet(rng, in_channels=4, out_channels=6)
        cost = CostVolume(
            tensor=Tensor(np.zeros((4, 5, 12, 12))),
            depths=depth_hypotheses(reference.near, reference.far, 5),
            reference=reference,
            variance_channels=1,
        )

        with pytest.raises(ShapeMismatchError):
            encode(cost, net)

    def test_cost_volume_depths_must_increase(self, reference):
        with pytest.raises(ShapeMismatchError):
            CostVolume(
                tensor=Tensor(np.zeros((1, 2, 4, 4))),
                depths=[3.0, 2.0],
                reference=reference,
                variance_channels=1,
            )


@pytest.mark.unit
class TestQuery:
    """Trilinear lookups at NDC points."""

    def test_voxel_centers_return_voxel_values(self, volume):
        ndc = volume.voxel_centers_ndc()

        features, colors = query(volume, ndc)

        expected = volume.features.data.reshape(3, -1).T
        np.testing.assert_allclose(features.data, expected, atol=1e-10)
        assert colors is None

    def test_ndc_corners_map_to_grid_corners(self, volume):
        ndc = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])

        voxels = volume.voxel_coords(ndc)

        np.testing.assert_allclose(voxels, [[0.0, 0.0, 0.0], [4.0, 11.75, 11.75]])

    def test_padding_keeps_original_voxels_in_place(self, volume):
        padded = pad_volume(volume, 2)
        ndc = volume.voxel_centers_ndc()

        original, _ = query(volume, ndc)
        moved, _ = query(padded, ndc)

        assert padded.spatial_shape == (9, 16, 16)
        assert padded.margins == (2, 2, 2)
        assert padded.base_shape == volume.spatial_shape
        np.testing.assert_allclose(moved.data, original.data, atol=1e-10)

    def test_padding_replicates_edges(self, volume):
        padded = pad_volume(volume, (0, 1, 0))

        np.testing.assert_array_equal(padded.features.data[:, :, 0], volume.features.data[:, :, 0])

    def test_zero_padding_is_a_no_op(self, volume):
        assert pad_volume(volume, 0) is volume

    def test_negative_padding_rejected(self, volume):
        with pytest.raises(ShapeMismatchError):
            pad_volume(volume, -1)


@pytest.mark.unit
class TestAppendColors:
    """Per-voxel input colors."""

    def test_reference_colors_land_on_their_pixels(self, volume, reference):
        rng = np.random.default_rng(1)
        images = [rng.uniform(size=(48, 48, 3)) for _ in range(3)]
        cameras = [reference, rig_camera(22.0, -16.0, 48, 48), rig_camera(22.0, 16.0, 48, 48)]

        colored = append_voxel_colors(volume, images, cameras)

        assert colored.appended_colors.shape == (9, 5, 12, 12)
        for k in (0, 4):
            for j, i in ((0, 0), (3, 7), (11, 11)):
                np.testing.assert_allclose(
                    colored.appended_colors.data[0:3, k, j, i], images[0][4 * j, 4 * i], atol=1e-9
                )

    def test_appending_twice_is_rejected(self, volume, reference):
        images = [np.zeros((48, 48, 3))] * 3
        cameras = [reference, rig_camera(22.0, -16.0, 48, 48), rig_camera(22.0, 16.0, 48, 48)]
        colored = append_voxel_colors(volume, images, cameras)

        with pytest.raises(FinetuneStateError):
            append_voxel_colors(colored, images, cameras)

    def test_colors_follow_padding(self, volume, reference):
        images = [np.full((48, 48, 3), 0.25)] * 3
        cameras = [reference, rig_camera(22.0, -16.0, 48, 48), rig_camera(22.0, 16.0, 48, 48)]

        padded = pad_volume(append_voxel_colors(volume, images, cameras), 1)
        _, colors = query(padded, np.array([[0.5, 0.5, 0.5]]))

        assert padded.appended_colors.shape == (9, 7, 14, 14)
        np.testing.assert_allclose(colors.data, 0.25)

    def test_colors_must_share_the_grid(self, reference):
        with pytest.raises(ShapeMismatchError):
            EncodingVolume(
                features=Tensor(np.zeros((2, 3, 4, 4))),
                reference=reference,
                appended_colors=Tensor(np.zeros((9, 3, 4, 5))),
            )
