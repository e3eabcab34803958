"""Command line interface: offline attacks, evaluation runs, detection,
mask construction and the streaming server.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Every artifact
file is byte-reproducible given identical arguments and --seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .attack.config import (
    APPLICATIONS,
    CHANNEL_SOURCES,
    DEFAULT_ALPHA,
    DEFAULT_BOX_SIZE,
    DEFAULT_ITERATIONS,
    DEFAULT_XI,
    MODES,
    AttackConfig,
)
from .attack.loop import run_attack
from .attack.mask import Mask, Rect, build_mask, mask_from_png, mask_to_png, rects_from_json
from .detector.config import FULL_INPUT_SIDE, TOY_INPUT_SIDE, full_scale_config, toy_scale_config
from .detector.decode import DEFAULT_CONF_THRESHOLD, DEFAULT_IOU_THRESHOLD
from .detector.network import Detector, init_detector
from .detector.weights_io import load_weights
from .evaluation.corpus import MaskSpec, run_corpus
from .evaluation.csvio import (
    write_detections_csv,
    write_manifest,
    write_metrics_csv,
    write_report_csv,
    write_sweep_csv,
    write_trials_csv,
)
from .evaluation.metrics import mean_box_increase, success_rate
from .evaluation.sweep import SWEEP_PARAMETERS, SweepConfig, run_sweep
from .image import ImageTensor, letterbox, load_image, save_png

DEFAULT_SEED = 7


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (2 is reserved for runtime failures)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _env(name: str, fallback, cast=str):
    value = os.environ.get(name)
    if value is None:
        return fallback
    try:
        return cast(value)
    except ValueError:
        return fallback


def _add_detector_flags(p: argparse.ArgumentParser, env: bool = False):
    weights_default = _env("ADVOVERLAY_WEIGHTS", None) if env else None
    p.add_argument("--weights", default=weights_default,
                   help="ADVD weights file (overrides --preset)")
    p.add_argument("--preset", choices=("toy", "full"), default="toy",
                   help="detector preset when no weights file is given")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="seed for weight init and randomized placement")
    p.add_argument("--conf-threshold", type=float, default=DEFAULT_CONF_THRESHOLD)
    p.add_argument("--iou-threshold", type=float, default=DEFAULT_IOU_THRESHOLD)


def _add_attack_flags(p: argparse.ArgumentParser, env: bool = False):
    xi_default = _env("ADVOVERLAY_XI", DEFAULT_XI, float) if env else DEFAULT_XI
    alpha_default = _env("ADVOVERLAY_ALPHA", DEFAULT_ALPHA, float) if env else DEFAULT_ALPHA
    mode_default = _env("ADVOVERLAY_MODE", "multi-untargeted") if env else "multi-untargeted"
    p.add_argument("--mode", choices=MODES, default=mode_default)
    p.add_argument("--target", type=int, default=None,
                   help="1-based target class for targeted modes")
    p.add_argument("--xi", type=float, default=xi_default,
                   help="attack strength bound, 8-bit pixel units")
    p.add_argument("--alpha", type=float, default=alpha_default,
                   help="step size, 8-bit pixel units")
    p.add_argument("--monochrome", action="store_true")
    p.add_argument("--channel", choices=CHANNEL_SOURCES, default="average",
                   help="gradient source for monochrome overlays")
    p.add_argument("--monochrome-signed", action="store_true",
                   help="use sign() in the monochrome update too")
    p.add_argument("--application", choices=APPLICATIONS, default="overlay")


def _build_detector(args) -> Detector:
    if args.weights:
        return Detector(load_weights(args.weights))
    if args.preset == "full":
        weights = init_detector(full_scale_config(), FULL_INPUT_SIDE, args.seed)
    else:
        weights = init_detector(toy_scale_config(), TOY_INPUT_SIDE, args.seed)
    return Detector(weights)


def _build_config(args, iterations: int) -> AttackConfig:
    return AttackConfig(
        mode=args.mode,
        target_class=args.target,
        xi=args.xi,
        alpha=args.alpha,
        iterations=iterations,
        monochrome=args.monochrome,
        channel_source=args.channel,
        application=args.application,
        monochrome_signed=args.monochrome_signed,
    )


def _parse_rect(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"rect must be x,y,w,h, got {text!r}")
    x, y, w, h = (int(p) for p in parts)
    return Rect(x, y, w, h)


def _attack_mask(args, side: int) -> Mask:
    if args.mask_png:
        return mask_from_png(args.mask_png)
    if args.mask_json:
        return build_mask(rects_from_json(Path(args.mask_json).read_text()), side, side)
    if args.mask_rect:
        return build_mask([_parse_rect(r) for r in args.mask_rect], side, side)
    size = DEFAULT_BOX_SIZE
    return build_mask([Rect((side - size) // 2, (side - size) // 2, size, size)],
                      side, side)


def _config_manifest(config: AttackConfig) -> dict:
    return {
        "mode": config.mode,
        "target_class": config.target_class,
        "xi": config.xi,
        "alpha": config.alpha,
        "iterations": config.iterations,
        "monochrome": config.monochrome,
        "channel_source": config.channel_source,
        "application": config.application,
        "monochrome_signed": config.monochrome_signed,
    }


def cmd_attack(args) -> int:
    detector = _build_detector(args)
    image = letterbox(load_image(args.image), detector.input_side)
    mask = _attack_mask(args, detector.input_side)
    config = _build_config(args, args.iters)
    state, report = run_attack(
        image, mask, config, detector,
        stop_on_success=args.stop_on_success,
        conf_threshold=args.conf_threshold,
        iou_threshold=args.iou_threshold,
    )
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .attack.overlay import apply_perturbation

    adv = apply_perturbation(image, mask, state.delta, config.application)
    save_png(adv, out / "adversarial.png")
    write_report_csv(report, out / "report.csv")
    write_detections_csv(
        detector.detect(image, args.conf_threshold, args.iou_threshold),
        out / "detections_benign.csv",
    )
    write_detections_csv(
        detector.detect(adv, args.conf_threshold, args.iou_threshold),
        out / "detections_adversarial.csv",
    )
    print(f"success={report.success} iterations={report.iterations_used} "
          f"benign_boxes={report.benign_box_count} "
          f"adversarial_boxes={report.adversarial_box_count}")
    return 0


def cmd_detect(args) -> int:
    detector = _build_detector(args)
    image = letterbox(load_image(args.image), detector.input_side)
    dets = detector.detect(image, args.conf_threshold, args.iou_threshold)
    if args.output:
        write_detections_csv(dets, args.output)
    for d in dets:
        print(f"class={d.class_id} score={d.score:.4f} "
              f"x={d.b_x:.1f} y={d.b_y:.1f} w={d.b_w:.1f} h={d.b_h:.1f}")
    print(f"{len(dets)} detections")
    return 0


def cmd_corpus(args) -> int:
    detector = _build_detector(args)
    config = _build_config(args, args.budget)
    spec = MaskSpec(width=args.mask_width or args.mask_size,
                    height=args.mask_height or args.mask_size,
                    placement=args.placement)
    trials = run_corpus(args.corpus, config, spec, detector, args.budget,
                        seed=args.seed, conf_threshold=args.conf_threshold,
                        iou_threshold=args.iou_threshold)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trials_csv(trials, out / "trials.csv")
    write_metrics_csv(trials, args.budget, out / "metrics.csv")
    manifest = _config_manifest(config)
    manifest.update({
        "command": "corpus",
        "corpus": args.corpus,
        "iteration_budget": args.budget,
        "mask": f"{spec.width}x{spec.height}:{spec.placement}",
        "seed": args.seed,
        "version": __version__,
    })
    write_manifest(out / "manifest.txt", manifest)
    print(f"trials={len(trials)} "
          f"success_rate={success_rate(trials, args.budget):.3f} "
          f"mean_box_increase={mean_box_increase(trials, args.budget):.3f}")
    return 0


def cmd_sweep(args) -> int:
    detector = _build_detector(args)
    config = _build_config(args, args.budget)
    spec = MaskSpec(width=args.mask_width or args.mask_size,
                    height=args.mask_height or args.mask_size,
                    placement=args.placement)
    values = tuple(v.strip() for v in args.values.split(",") if v.strip())
    sweep = SweepConfig(
        varying_parameter=args.param,
        values=values,
        base=config,
        base_mask=spec,
        iteration_budget=args.budget,
        corpus=args.corpus,
    )
    rows = run_sweep(sweep, detector, seed=args.seed)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "sweep.csv")
    manifest = _config_manifest(config)
    manifest.update({
        "command": "sweep",
        "corpus": args.corpus,
        "iteration_budget": args.budget,
        "mask": f"{spec.width}x{spec.height}:{spec.placement}",
        "param": args.param,
        "seed": args.seed,
        "values": ",".join(values),
        "version": __version__,
    })
    write_manifest(out / "manifest.txt", manifest)
    print(f"sweep rows={len(rows)}")
    return 0


def cmd_make_mask(args) -> int:
    rects = [_parse_rect(r) for r in args.rect]
    mask = build_mask(rects, args.height, args.width)
    mask_to_png(mask, args.out)
    print(f"mask {args.width}x{args.height}, {mask.pixel_count} pixels set -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server.app import create_app

    detector = _build_detector(args)
    config = _build_config(args, DEFAULT_ITERATIONS)
    app = create_app(
        detector,
        default_config=config,
        iters_per_frame=args.iters_per_frame,
        conf_threshold=args.conf_threshold,
        iou_threshold=args.iou_threshold,
        static_dir=args.static_dir,
    )
    print(f"serving ws://{args.host}:{args.port}/attack "
          f"(detector side {detector.input_side}, {detector.num_classes} classes)")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="advoverlay",
                     description="Mask-localized adversarial overlay attacks "
                                 "on a YOLO-style detector.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("attack", help="attack a single image")
    _add_detector_flags(p)
    _add_attack_flags(p)
    p.add_argument("--image", required=True)
    p.add_argument("--mask-rect", action="append", default=[], metavar="X,Y,W,H")
    p.add_argument("--mask-png")
    p.add_argument("--mask-json")
    p.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--stop-on-success", action="store_true")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("detect", help="run plain detection on an image")
    _add_detector_flags(p)
    p.add_argument("--image", required=True)
    p.add_argument("--output", help="optional detections CSV path")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("corpus", help="attack every image in a directory")
    _add_detector_flags(p)
    _add_attack_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--mask-size", type=int, default=DEFAULT_BOX_SIZE)
    p.add_argument("--mask-width", type=int)
    p.add_argument("--mask-height", type=int)
    p.add_argument("--placement", choices=("centered", "random"), default="centered")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("sweep", help="hyperparameter sweep over a corpus")
    _add_detector_flags(p)
    _add_attack_flags(p)
    p.add_argument("--param", choices=SWEEP_PARAMETERS, required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--corpus", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--mask-size", type=int, default=DEFAULT_BOX_SIZE)
    p.add_argument("--mask-width", type=int)
    p.add_argument("--mask-height", type=int)
    p.add_argument("--placement", choices=("centered", "random"), default="centered")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("make-mask", help="build a mask PNG from rectangles")
    p.add_argument("--rect", action="append", required=True, metavar="X,Y,W,H")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_mask)

    p = sub.add_parser("serve", help="start the streaming attack server")
    _add_detector_flags(p, env=True)
    _add_attack_flags(p, env=True)
    p.add_argument("--host", default=_env("ADVOVERLAY_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=_env("ADVOVERLAY_PORT", 8700, int))
    p.add_argument("--iters-per-frame", type=int,
                   default=_env("ADVOVERLAY_ITERS_PER_FRAME", 4, int))
    p.add_argument("--static-dir", default=None,
                   help="serve a built control panel from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def run_cli(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 2
    except Exception as exc:
        print(f"advoverlay: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
