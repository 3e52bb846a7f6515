"""
Command-line entry point.

    mvsrf gen-scenes --count N --seed S --out DIR
    mvsrf train --scenes DIR --config FILE --out DIR
    mvsrf finetune --checkpoint FILE --scene DIR --iters N
    mvsrf render --checkpoint FILE --scene DIR --view ID --out DIR
    mvsrf eval --pred-dir DIR --truth-dir DIR
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from src.application.schemas.train import TrainConfigOverrides
from src.application.use_cases.evaluation import EvaluateRendersCommand
from src.application.use_cases.rendering import RenderViewCommand
from src.application.use_cases.scenes import GenerateScenesCommand
from src.application.use_cases.training import FinetuneCommand, TrainNetworkCommand
from src.configuration.config import Settings
from src.configuration.di_container import DIContainer
from src.configuration.log_setup import configure_logging
from src.domain.model.enums import Background
from src.domain.model.training.train_config import TrainConfig
from src.domain.services.toy_scenes import DEFAULT_HEIGHT, DEFAULT_WIDTH
from src.domain.shared_kernel import DomainException

logger = logging.getLogger(__name__)

EXIT_DOMAIN_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvsrf", description="Radiance fields from three posed views, with fine-tuning."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-scenes", help="Generate toy scenes with oracle renders")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    gen.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    gen.add_argument("--quadrature", type=int, default=1024)
    gen.add_argument("--no-ground", action="store_true", help="Omit the checker slab")
    gen.add_argument("--emitter", action="store_true", help="Add a view-dependent primitive")
    gen.add_argument("--background", choices=[b.value for b in Background], default=None)

    train = sub.add_parser("train", help="Train the networks across scenes")
    train.add_argument("--scenes", type=Path, required=True)
    train.add_argument("--config", type=Path, default=None, help="JSON overrides")
    train.add_argument("--out", type=Path, required=True)
    train.add_argument("--iters", type=int, default=None)
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--resume", type=Path, default=None)

    ft = sub.add_parser("finetune", help="Fine-tune one scene's volume and MLP")
    ft.add_argument("--checkpoint", type=Path, required=True)
    ft.add_argument("--scene", type=Path, required=True)
    ft.add_argument("--iters", type=int, required=True)
    ft.add_argument("--out", type=Path, default=None)
    ft.add_argument("--config", type=Path, default=None, help="JSON overrides")
    ft.add_argument("--pad", type=int, default=None, help="Voxels of padding per side")
    ft.add_argument("--from-scratch", action="store_true")
    ft.add_argument("--samples", type=int, default=None)
    ft.add_argument("--seed", type=int, default=None)

    render = sub.add_parser("render", help="Render views from a checkpoint")
    render.add_argument("--checkpoint", type=Path, required=True)
    render.add_argument("--scene", type=Path, required=True)
    render.add_argument("--view", required=True, help="View id, split name or 'all'")
    render.add_argument("--out", type=Path, required=True)
    render.add_argument("--samples", type=int, default=None)
    render.add_argument("--seed", type=int, default=None)

    ev = sub.add_parser("eval", help="Score renders against references")
    ev.add_argument("--pred-dir", type=Path, required=True)
    ev.add_argument("--truth-dir", type=Path, required=True)
    ev.add_argument("--csv", type=Path, default=None, help="Defaults to <pred-dir>/metrics.csv")
    return parser


def load_config(container: DIContainer, path: Optional[Path]) -> TrainConfig:
    config = container.train_config()
    if path is None:
        return config
    if not path.is_file():
        raise DomainException(f"Config file {path} does not exist")
    try:
        overrides = TrainConfigOverrides.model_validate_json(path.read_text())
    except ValidationError as e:
        raise DomainException(f"Invalid config {path}: {e}") from e
    return overrides.apply(config)


def _seed(args: argparse.Namespace, settings: Settings) -> int:
    return settings.seed if args.seed is None else args.seed


def run(args: argparse.Namespace, container: DIContainer) -> int:
    settings = container.settings
    if args.command == "gen-scenes":
        background = Background(args.background) if args.background else settings.background
        manifests = container.generate_scenes_use_case().execute(
            GenerateScenesCommand(
                out=args.out,
                count=args.count,
                seed=_seed(args, settings),
                width=args.width,
                height=args.height,
                n_quadrature=args.quadrature,
                ground=not args.no_ground,
                emitter=args.emitter,
                background=background,
            )
        )
        print(f"Wrote {len(manifests)} scene(s) to {args.out}")
    elif args.command == "train":
        config = load_config(container, args.config)
        config = replace(
            config,
            seed=config.seed if args.seed is None else args.seed,
            iterations=config.iterations if args.iters is None else args.iters,
        )
        result = container.train_network_use_case().execute(
            TrainNetworkCommand(
                scenes=args.scenes,
                out=args.out,
                config=config,
                options=container.pipeline_options(),
                resume=args.resume,
            )
        )
        final = f"{result.losses[-1]:.6f}" if result.losses else "n/a"
        print(f"Final loss {final}; checkpoint {result.checkpoint}")
    elif args.command == "finetune":
        config = load_config(container, args.config)
        config = replace(
            config,
            seed=config.seed if args.seed is None else args.seed,
            n_samples=config.n_samples if args.samples is None else args.samples,
        )
        out = args.out or args.checkpoint.parent / f"finetune_{args.scene.name}"
        result = container.finetune_use_case().execute(
            FinetuneCommand(
                checkpoint=args.checkpoint,
                scene=args.scene,
                iterations=args.iters,
                out=out,
                config=config,
                options=container.pipeline_options(),
                pad=settings.finetune_pad if args.pad is None else args.pad,
                from_scratch=args.from_scratch,
            )
        )
        for iteration, score in result.metric_log:
            print(f"iteration {iteration:>6d}  PSNR {score:.2f} dB")
        print(f"Checkpoint {result.checkpoint}")
    elif args.command == "render":
        rendered = container.render_view_use_case().execute(
            RenderViewCommand(
                checkpoint=args.checkpoint,
                scene=args.scene,
                view=args.view,
                out=args.out,
                n_samples=settings.n_samples if args.samples is None else args.samples,
                chunk=settings.render_chunk,
                seed=_seed(args, settings),
                options=container.pipeline_options(),
            )
        )
        for view in rendered:
            print(f"{view.view_id}: {view.image_path} {view.depth_path}")
    elif args.command == "eval":
        report = container.evaluate_renders_use_case().execute(
            EvaluateRendersCommand(
                pred_dir=args.pred_dir,
                truth_dir=args.truth_dir,
                csv_path=args.csv or args.pred_dir / "metrics.csv",
            )
        )
        print(report.summary())
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings()
    except ValidationError as e:
        print(f"Invalid settings: {e}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR
    configure_logging(settings.log_level, settings.log_format)
    try:
        return run(args, DIContainer(settings))
    except DomainException as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
