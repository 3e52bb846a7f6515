"""
Integration tests: generated scene → training → fine-tuning → rendering → evaluation.
"""

import csv
import shutil
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.application.use_cases.evaluation import EvaluateRendersCommand, EvaluateRendersUseCase
from src.application.use_cases.rendering import RenderViewCommand, RenderViewUseCase
from src.application.use_cases.training import (
    FinetuneCommand,
    FinetuneUseCase,
    TrainNetworkCommand,
    TrainNetworkUseCase,
)
from src.infrastructure.adapters.primary.cli import main as cli
from src.infrastructure.adapters.secondary.logs.csv_metrics_table import CsvMetricsTable
from src.infrastructure.adapters.secondary.logs.csv_training_log import CsvTrainingLog
from src.infrastructure.adapters.secondary.persistence import (
    BinaryCheckpointRepository,
    FileImageRepository,
    FileSceneRepository,
)

TEST_VIEWS = ["view_16", "view_17", "view_18", "view_19"]


def csv_rows(path: Path) -> list[list[str]]:
    with path.open(newline="") as stream:
        return list(csv.reader(stream))


@pytest.fixture
def images() -> FileImageRepository:
    return FileImageRepository()


@pytest.fixture
def scenes(images) -> FileSceneRepository:
    return FileSceneRepository(images)


@pytest.fixture
def trained(scene_dir, scenes, tiny_options, tiny_config, tmp_path) -> Path:
    """Checkpoint after two training iterations on the generated scene."""
    use_case = TrainNetworkUseCase(scenes, BinaryCheckpointRepository(), CsvTrainingLog())
    result = use_case.execute(
        TrainNetworkCommand(
            scenes=scene_dir.parent,
            out=tmp_path / "run",
            config=tiny_config,
            options=tiny_options,
        )
    )
    return result.checkpoint


def render(scenes, images, checkpoint, scene_dir, out, tiny_options, view="test"):
    use_case = RenderViewUseCase(scenes, BinaryCheckpointRepository(), images)
    return use_case.execute(
        RenderViewCommand(
            checkpoint=checkpoint,
            scene=scene_dir,
            view=view,
            out=out,
            n_samples=8,
            chunk=512,
            seed=1,
            options=tiny_options,
        )
    )


@pytest.mark.integration
class TestScenePipeline:
    """Use cases chained over real files."""

    def test_training_writes_checkpoint_and_log(self, trained):
        rows = csv_rows(trained.parent / "train_log.csv")

        assert trained.is_file()
        assert rows[0] == ["iteration", "loss", "wall_ms", "seed"]
        assert [r[0] for r in rows[1:]] == ["1", "2"]
        assert all(np.isfinite(float(r[1])) for r in rows[1:])

    def test_finetune_render_and_evaluate(
        self, trained, scene_dir, scenes, images, tiny_options, tiny_config, tmp_path
    ):
        finetune = FinetuneUseCase(
            scenes, BinaryCheckpointRepository(), CsvTrainingLog(), chunk=512
        )
        result = finetune.execute(
            FinetuneCommand(
                checkpoint=trained,
                scene=scene_dir,
                iterations=2,
                out=tmp_path / "ft",
                config=tiny_config,
                options=tiny_options,
            )
        )

        assert [i for i, _ in result.metric_log] == [0, 1, 2]
        assert csv_rows(tmp_path / "ft" / "finetune_log_psnr.csv")[0] == ["iteration", "psnr"]

        rendered = render(
            scenes, images, result.checkpoint, scene_dir, tmp_path / "renders", tiny_options
        )
        assert [r.view_id for r in rendered] == TEST_VIEWS
        assert images.read_png(rendered[0].image_path).shape == (48, 48, 3)
        assert images.read_pfm(rendered[0].depth_path).shape == (48, 48)

        report = EvaluateRendersUseCase(images, CsvMetricsTable()).execute(
            EvaluateRendersCommand(
                pred_dir=tmp_path / "renders",
                truth_dir=scene_dir,
                csv_path=tmp_path / "metrics.csv",
            )
        )
        assert [row.view for row in report.views] == TEST_VIEWS
        assert all(row.psnr > 0.0 and row.ssim is not None for row in report.views)
        assert all(row.depth_pixels > 0 for row in report.views)
        assert csv_rows(tmp_path / "metrics.csv")[-1][0] == "mean"

    def test_finetuned_render_needs_no_input_images(
        self, trained, scene_dir, scenes, images, tiny_options, tiny_config, tmp_path
    ):
        result = FinetuneUseCase(scenes, BinaryCheckpointRepository(), CsvTrainingLog()).execute(
            FinetuneCommand(
                checkpoint=trained,
                scene=scene_dir,
                iterations=1,
                out=tmp_path / "ft",
                config=tiny_config,
                options=tiny_options,
            )
        )
        before = render(
            scenes, images, result.checkpoint, scene_dir, tmp_path / "a", tiny_options, "view_17"
        )

        shutil.rmtree(scene_dir / "images")
        after = render(
            scenes, images, result.checkpoint, scene_dir, tmp_path / "b", tiny_options, "view_17"
        )

        np.testing.assert_array_equal(
            images.read_png(after[0].image_path), images.read_png(before[0].image_path)
        )
        np.testing.assert_array_equal(
            images.read_pfm(after[0].depth_path), images.read_pfm(before[0].depth_path)
        )

    def test_finetune_resumes_a_session(
        self, trained, scene_dir, scenes, tiny_options, tiny_config, tmp_path
    ):
        use_case = FinetuneUseCase(scenes, BinaryCheckpointRepository(), CsvTrainingLog())
        first = use_case.execute(
            FinetuneCommand(trained, scene_dir, 1, tmp_path / "ft", tiny_config, tiny_options)
        )

        second = use_case.execute(
            FinetuneCommand(
                first.checkpoint, scene_dir, 1, tmp_path / "ft2", tiny_config, tiny_options
            )
        )

        assert first.session.iteration == 1
        assert second.session.iteration == 2

    def test_training_resumes_from_checkpoint(
        self, trained, scene_dir, scenes, tiny_options, tiny_config, tmp_path
    ):
        result = TrainNetworkUseCase(
            scenes, BinaryCheckpointRepository(), CsvTrainingLog()
        ).execute(
            TrainNetworkCommand(
                scenes=scene_dir,
                out=tmp_path / "resumed",
                config=tiny_config,
                options=tiny_options,
                resume=trained,
            )
        )

        assert len(result.losses) == tiny_config.iterations
        assert result.checkpoint.is_file()

    def test_interrupted_training_matches_an_uninterrupted_run(
        self, scene_dir, scenes, tiny_options, tiny_config, tmp_path
    ):
        """Weights, Adam moments and the step counter all survive the checkpoint."""
        use_case = TrainNetworkUseCase(scenes, BinaryCheckpointRepository(), CsvTrainingLog())
        straight = use_case.execute(
            TrainNetworkCommand(scene_dir.parent, tmp_path / "straight", tiny_config, tiny_options)
        )
        one_step = replace(tiny_config, iterations=1)
        first = use_case.execute(
            TrainNetworkCommand(scene_dir.parent, tmp_path / "first", one_step, tiny_options)
        )

        second = use_case.execute(
            TrainNetworkCommand(
                scene_dir.parent, tmp_path / "second", one_step, tiny_options, first.checkpoint
            )
        )

        assert second.losses[0] == pytest.approx(straight.losses[1], rel=1e-10)
        assert csv_rows(tmp_path / "second" / "train_log.csv")[1][0] == "2"

    def test_resumed_finetuning_matches_an_uninterrupted_run(
        self, trained, scene_dir, scenes, tiny_options, tiny_config, tmp_path
    ):
        use_case = FinetuneUseCase(scenes, BinaryCheckpointRepository(), CsvTrainingLog())
        straight = use_case.execute(
            FinetuneCommand(trained, scene_dir, 2, tmp_path / "straight", tiny_config, tiny_options)
        )
        first = use_case.execute(
            FinetuneCommand(trained, scene_dir, 1, tmp_path / "first", tiny_config, tiny_options)
        )

        second = use_case.execute(
            FinetuneCommand(
                first.checkpoint, scene_dir, 1, tmp_path / "second", tiny_config, tiny_options
            )
        )

        # The reference rotation is re-orthonormalized on load.
        np.testing.assert_allclose(
            second.session.loss_log[-1][1], straight.session.loss_log[-1][1], rtol=1e-8
        )
        assert second.session.loss_log[-1][0] == 2


@pytest.mark.integration
class TestCommandLine:
    """The same workflow through the `mvsrf` entry point."""

    @pytest.fixture(autouse=True)
    def tiny_environment(self, mock_env, monkeypatch, mocker):
        for name, value in {
            "MVSR_FEATURE_CHANNELS": "8",
            "MVSR_ENCODING_CHANNELS": "8",
            "MVSR_DEPTH_PLANES": "8",
            "MVSR_MLP_WIDTH": "16",
            "MVSR_POSITION_FREQS": "2",
            "MVSR_DIRECTION_FREQS": "1",
            "MVSR_SAMPLES": "8",
            "MVSR_RAYS_PER_BATCH": "32",
            "MVSR_CHECKPOINT_INTERVAL": "1",
            "MVSR_RENDER_CHUNK": "512",
        }.items():
            monkeypatch.setenv(name, value)
        mocker.patch.object(cli, "configure_logging")

    def test_full_workflow(self, tmp_path, capsys):
        scenes_dir, run_dir = tmp_path / "scenes", tmp_path / "run"

        generate = ["gen-scenes", "--count", "1", "--seed", "5", "--out", str(scenes_dir)]
        assert cli.main(generate + ["--width", "48", "--height", "48", "--quadrature", "16"]) == 0
        scene = scenes_dir / "scene_0005"
        assert (scene / "manifest.txt").is_file()

        assert cli.main(
            ["train", "--scenes", str(scenes_dir), "--out", str(run_dir), "--iters", "1"]
        ) == 0
        checkpoint = run_dir / "checkpoint.mvsr"

        assert cli.main(
            ["finetune", "--checkpoint", str(checkpoint), "--scene", str(scene), "--iters", "1"]
        ) == 0
        finetuned = run_dir / "finetune_scene_0005" / "finetuned.mvsr"
        assert finetuned.is_file()

        render_args = ["render", "--checkpoint", str(finetuned), "--scene", str(scene)]
        render_args += ["--view", "view_16", "--out", str(tmp_path / "renders")]
        assert cli.main(render_args) == 0
        assert cli.main(
            ["eval", "--pred-dir", str(tmp_path / "renders"), "--truth-dir", str(scene)]
        ) == 0

        assert "PSNR" in capsys.readouterr().out
        assert (tmp_path / "renders" / "metrics.csv").is_file()

    def test_missing_scene_exits_with_two(self, tmp_path):
        code = cli.main(
            ["train", "--scenes", str(tmp_path / "nothing"), "--out", str(tmp_path / "run")]
        )

        assert code == cli.EXIT_DOMAIN_ERROR
