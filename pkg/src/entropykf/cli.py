"""Command line interface.

Subcommands:
  extract             run the key-frame extraction pipeline on a frame source
  generate-synthetic  build a deterministic synthetic test video + ground truth

Exit codes: 0 ok, 2 bad configuration, 3 ingest error, 4 evaluation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import synthetic
from .evaluation import EvaluationError
from .ingest import IngestError, SourceSpec
from .pipeline import ConfigError, PipelineConfig, run_pipeline

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_EVALUATION = 4


def _parse_size(value: str) -> tuple[int, int]:
    try:
        w, _, h = value.lower().partition("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, e.g. 320x240, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropykf",
        description="Entropy-based video key-frame extraction")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="extract key-frames from a frame source")
    ex.add_argument("--input", required=True,
                    help="PGM directory, raw/y4m file, or - for stdin")
    ex.add_argument("--format", required=True, choices=["pgm-dir", "raw", "y4m"],
                    help="how to interpret --input")
    ex.add_argument("--width", type=int, help="frame width (required for raw)")
    ex.add_argument("--height", type=int, help="frame height (required for raw)")
    ex.add_argument("--cut-threshold", type=float, default=0.9,
                    help="correlation below this is a cut (default 0.9)")
    ex.add_argument("--min-shot-len", type=int, default=10,
                    help="shots shorter than this merge into their successor (default 10)")
    ex.add_argument("--min-bin-size", type=int, default=20,
                    help="bins need strictly more members than this (default 20)")
    ex.add_argument("--sd-threshold", type=float, default=0.15,
                    help="segment-entropy SD at or below this marks a duplicate (default 0.15)")
    ex.add_argument("--fallback-keyframe", action="store_true",
                    help="emit the largest bin's centre when every bin misses the gate")
    ex.add_argument("--gt", help="ground-truth file enabling the evaluation block")
    ex.add_argument("--match-window", type=int, default=12,
                    help="max |detected - truth| distance for a match (default 12)")
    ex.add_argument("--out", required=True, help="output directory for images and report.json")
    ex.add_argument("--seed-report", action="store_true",
                    help="omit volatile fields (timestamp) so report.json bytes reproduce")

    gen = sub.add_parser("generate-synthetic",
                         help="generate a seeded synthetic PGM sequence with planted "
                              "cuts, fades, and a repeated scene")
    gen.add_argument("--scenes", type=int, default=3, help="number of distinct scenes")
    gen.add_argument("--frames-per-scene", type=int, default=997,
                     help="frames per scene segment (default 997)")
    gen.add_argument("--size", type=_parse_size, default=(320, 240),
                     help="frame size as WxH (default 320x240)")
    gen.add_argument("--seed", type=int, default=0, help="RNG seed")
    gen.add_argument("--fade-frames", type=int, default=synthetic.DEFAULT_FADE_FRAMES,
                     help="noise frames between segments (default 4)")
    gen.add_argument("--repeat-first", action=argparse.BooleanOptionalAction, default=True,
                     help="append a verbatim repeat of the first scene (default on)")
    gen.add_argument("--out", required=True, help="directory for the PGM frames")
    gen.add_argument("--gt-out", help="where to write the ground-truth file")
    return parser


def _cmd_extract(args: argparse.Namespace) -> int:
    try:
        spec = SourceSpec(kind=args.format, path=args.input,
                          width=args.width, height=args.height)
        config = PipelineConfig(
            source=spec,
            output_dir=Path(args.out),
            cut_threshold=args.cut_threshold,
            min_shot_len=args.min_shot_len,
            min_bin_size=args.min_bin_size,
            sd_threshold=args.sd_threshold,
            match_window=args.match_window,
            fallback_keyframe=args.fallback_keyframe,
            ground_truth=None if args.gt is None else Path(args.gt),
            seed_report=args.seed_report,
        )
        config.validate()
    except ValueError as exc:
        print(f"entropykf: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = run_pipeline(config)
    except ConfigError as exc:
        print(f"entropykf: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestError as exc:
        print(f"entropykf: ingest error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except EvaluationError as exc:
        print(f"entropykf: evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVALUATION

    print(f"frames: {report['total_frames']}  shots: {len(report['shots'])}  "
          f"candidates: {len(report['candidates'])}  keyframes: {len(report['keyframes'])}  "
          f"eliminated: {len(report['eliminations'])}")
    if "evaluation" in report:
        ev = report["evaluation"]
        print(f"evaluation: matched {ev['matched']}, redundant {ev['redundant']}, "
              f"missing {ev['missing']}, deviation {ev['deviation']:.4f}, "
              f"compactness {ev['compactness']:.5f}")
    print(f"report: {Path(args.out) / 'report.json'}")
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    width, height = args.size
    try:
        layout = synthetic.generate(
            out_dir=args.out, gt_out=args.gt_out,
            scenes=args.scenes, frames_per_scene=args.frames_per_scene,
            width=width, height=height, seed=args.seed,
            fade_frames=args.fade_frames, repeat_first=args.repeat_first)
    except ValueError as exc:
        print(f"entropykf: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {layout.total_frames} frames ({width}x{height}) to {args.out}")
    if args.gt_out:
        print(f"ground truth ({len(layout.gt_indices)} key-frames): {args.gt_out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "extract":
        return _cmd_extract(args)
    return _cmd_generate(args)


if __name__ == "__main__":
    sys.exit(main())
