"""Command-line interface: run one image, batch a directory, or evaluate a
result against annotations.

Exit codes: 0 success, 1 usage, 2 I/O, 3 bad data or schema, 4 degenerate
geometry.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, canvas, imaging, metrics, pose
from .config import OUTPUT_KINDS, PipelineConfig, config_from_mapping, load_config_file
from .errors import (
    CompositionError,
    DegenerateGeometry,
    InvalidParameter,
    ParseError,
    SchemaError,
)
from .pipeline import run_pipeline

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="TOML config file (default: ./icc.toml when present)")
    p.add_argument("--cone-opening", type=float, default=None)
    p.add_argument("--gaze-correction", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--fg-threshold", type=float, default=None)
    p.add_argument("--hull-up", type=float, nargs=2, metavar=("SX", "SY"), default=None)
    p.add_argument("--hull-down", type=float, nargs=2, metavar=("SX", "SY"), default=None)
    p.add_argument("--median-kernel", type=int, default=None)
    p.add_argument("--bilateral-diameter", type=int, default=None)
    p.add_argument("--bilateral-sigma-color", type=float, default=None)
    p.add_argument("--bilateral-sigma-space", type=float, default=None)
    p.add_argument("--inpaint-radius", type=int, default=None)
    p.add_argument("--morph-close", type=int, default=None)
    p.add_argument("--morph-open", type=int, default=None)
    p.add_argument("--post-median", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-confidence", type=float, default=None)
    p.add_argument("--arc-step", type=float, default=None)
    p.add_argument("--frame-margin", type=int, default=None)
    p.add_argument(
        "--outputs",
        type=str,
        default=None,
        help=f"comma-separated subset of {','.join(OUTPUT_KINDS)}",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="icc", description="Reconstruct the compositional structure of a figurative image.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="chatty logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="process one image")
    p_run.add_argument("image", type=Path)
    p_run.add_argument("--keypoints", type=Path, default=None, help="keypoint sidecar (default: <stem>.keypoints.json)")
    p_run.add_argument("--out", type=Path, default=Path("."))
    _add_config_flags(p_run)

    p_batch = sub.add_parser("batch", help="process every image in a directory")
    p_batch.add_argument("directory", type=Path)
    p_batch.add_argument("--out", type=Path, default=Path("."))
    p_batch.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p_batch)

    p_eval = sub.add_parser("eval", help="score a result against annotations")
    p_eval.add_argument("--annotations", type=Path, required=True)
    p_eval.add_argument("--result", type=Path, required=True)
    return parser


def _collect_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    config_path = args.config if args.config is not None else Path("icc.toml")
    if config_path.exists():
        cfg = load_config_file(config_path, base=cfg)
    elif args.config is not None:
        raise FileNotFoundError(f"config file not found: {config_path}")
    overrides = {}
    for name in (
        "cone_opening", "gaze_correction", "k", "fg_threshold", "hull_up", "hull_down",
        "median_kernel", "bilateral_diameter", "bilateral_sigma_color", "bilateral_sigma_space",
        "inpaint_radius", "morph_close", "morph_open", "post_median", "seed",
        "min_confidence", "arc_step", "frame_margin",
    ):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.outputs is not None:
        overrides["outputs"] = tuple(s.strip() for s in args.outputs.split(",") if s.strip())
    return config_from_mapping(overrides, base=cfg)


def _sidecar_path(image_path: Path) -> Path:
    return image_path.with_name(image_path.stem + ".keypoints.json")


def _process_image(image_path: Path, keypoints_path: Path, out_dir: Path, cfg: PipelineConfig) -> Path:
    if not keypoints_path.exists():
        raise FileNotFoundError(f"keypoint file not found: {keypoints_path}")
    image = imaging.read_image(image_path)
    poses = pose.parse_keypoints(keypoints_path.read_bytes())
    output = run_pipeline(image, poses, cfg, image_id=image_path.stem)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = image_path.stem
    if "colored" in cfg.outputs:
        imaging.write_png(out_dir / f"{stem}.icc.png", output.colored)
    if "binary" in cfg.outputs:
        imaging.write_png(out_dir / f"{stem}.icc-binary.png", output.binary)
    if "json" in cfg.outputs:
        imaging.write_bytes(out_dir / f"{stem}.icc.json", canvas.serialize_result(output.result))
    if "debug" in cfg.outputs:
        for name, raster in sorted(output.debug.items()):
            imaging.write_png(out_dir / f"{stem}.debug-{name}.png", raster)
    return out_dir / f"{stem}.icc.json"


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _collect_config(args)
    keypoints = args.keypoints if args.keypoints is not None else _sidecar_path(args.image)
    if not args.image.exists():
        raise FileNotFoundError(f"image not found: {args.image}")
    _process_image(args.image, keypoints, args.out, cfg)
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    cfg = _collect_config(args)
    if not args.directory.is_dir():
        raise FileNotFoundError(f"not a directory: {args.directory}")
    images = sorted(
        p for p in args.directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    todo = []
    for image_path in images:
        sidecar = _sidecar_path(image_path)
        if sidecar.exists():
            todo.append((image_path, sidecar))
        else:
            log.warning("skipping %s: no sidecar %s", image_path.name, sidecar.name)
    if not todo:
        log.warning("nothing to process in %s", args.directory)
        return 0
    jobs = max(1, args.jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(_process_image, img, side, args.out, cfg) for img, side in todo
        ]
        for fut in futures:
            fut.result()
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    annotations = metrics.parse_annotations(args.annotations.read_bytes())
    result = canvas.parse_result(args.result.read_bytes())
    report = metrics.evaluate(annotations, result)
    print(f"image: {result.image_id}")
    print(metrics.format_report_table(report))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version; map its error exits to 1
        code = exc.code if exc.code in (0, None) else 1
        return int(code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "batch":
            return _cmd_batch(args)
        return _cmd_eval(args)
    except (ParseError, SchemaError, InvalidParameter) as exc:
        print(f"icc: {exc}", file=sys.stderr)
        return 3
    except DegenerateGeometry as exc:
        print(f"icc: degenerate geometry: {exc}", file=sys.stderr)
        return 4
    except (FileNotFoundError, NotADirectoryError, PermissionError, OSError) as exc:
        print(f"icc: {exc}", file=sys.stderr)
        return 2
    except CompositionError as exc:
        print(f"icc: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
