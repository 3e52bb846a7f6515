"""
Unit tests for the application schemas and the training configuration.
"""

import math

import pytest
from pydantic import ValidationError

from src.application.schemas.metrics import CSV_COLUMNS, EvaluationReport, ViewMetrics
from src.application.schemas.scene import ToySceneSchema
from src.application.schemas.train import TrainConfigOverrides
from src.domain.model.enums import FloatWidth
from src.domain.model.training.train_config import TrainConfig
from src.domain.services.toy_scenes import generate_toy_scene
from src.domain.shared_kernel import DomainException


@pytest.mark.unit
class TestTrainConfig:
    """Optimization settings."""

    def test_defaults(self):
        config = TrainConfig()

        assert config.rays_per_batch == 1024
        assert config.learning_rate == 5e-4
        assert config.float_width is FloatWidth.FLOAT64

    @pytest.mark.parametrize(
        "overrides", [{"iterations": 0}, {"n_samples": 1}, {"seed": -1}, {"grad_clip": 0.0}]
    )
    def test_rejects_invalid_values(self, overrides):
        with pytest.raises(DomainException):
            TrainConfig(**overrides)

    def test_learning_rate_decay(self):
        config = TrainConfig(learning_rate=1.0, lr_decay=0.1, lr_decay_steps=100)

        assert config.learning_rate_at(0) == 1.0
        assert config.learning_rate_at(100) == pytest.approx(0.1)
        assert config.learning_rate_at(50) == pytest.approx(math.sqrt(0.1))


@pytest.mark.unit
class TestTrainConfigOverrides:
    """JSON overrides of a run configuration."""

    def test_apply_keeps_unset_fields(self):
        overrides = TrainConfigOverrides.model_validate({"iterations": 5, "float_width": 4})

        config = overrides.apply(TrainConfig(seed=9))

        assert config.iterations == 5
        assert config.float_width is FloatWidth.FLOAT32
        assert config.seed == 9

    def test_unknown_fields_are_rejected(self):
        with pytest.raises(ValidationError):
            TrainConfigOverrides.model_validate({"iteratons": 5})

    def test_values_are_validated(self):
        with pytest.raises(ValidationError):
            TrainConfigOverrides.model_validate({"n_samples": 1})

    def test_background_is_not_a_training_setting(self):
        """Render background belongs to the pipeline options, not to the optimizer config."""
        with pytest.raises(ValidationError):
            TrainConfigOverrides.model_validate({"background": "white"})

        assert not hasattr(TrainConfig(), "background")


@pytest.mark.unit
class TestToySceneSchema:
    """scene.json contents."""

    def test_round_trip_through_json(self):
        scene = generate_toy_scene(11, emitter=True)

        text = ToySceneSchema.from_domain(scene).model_dump_json()
        restored = ToySceneSchema.model_validate_json(text).to_domain()

        assert restored.id == scene.id and restored.seed == 11
        assert [repr(p) for p in restored.primitives] == [repr(p) for p in scene.primitives]

    def test_opaque_density_serializes_as_null(self):
        schema = ToySceneSchema.from_domain(generate_toy_scene(3, ground=True))

        assert schema.primitives[0].density is None
        assert math.isinf(schema.to_domain().primitives[0].density)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            ToySceneSchema.model_validate(
                {
                    "id": "x",
                    "seed": 0,
                    "primitives": [{"kind": "cone", "albedo": [0, 0, 0], "center": [0, 0, 0]}],
                }
            )


@pytest.mark.unit
class TestEvaluationReport:
    """Per-view rows and their means."""

    def test_csv_row_marks_missing_values(self):
        row = ViewMetrics(view="view_16", psnr=31.5, ssim=0.9)

        assert row.csv_row() == ["view_16", "31.500000", "0.900000", "n/a", "n/a", "n/a", "0"]
        assert len(CSV_COLUMNS) == len(row.csv_row())

    def test_means_skip_missing_values(self):
        report = EvaluationReport(
            views=[
                ViewMetrics(view="a", psnr=30.0, abs_err=0.02, depth_pixels=10),
                ViewMetrics(view="b", psnr=20.0),
            ]
        )

        assert report.mean_psnr == 25.0
        assert report.mean_abs_err == 0.02
        assert report.mean_ssim is None
        assert "n/a" in report.summary()
        assert "25.0000 dB" in report.summary()
