"""Command line: export-probmaps --in DIR --out DIR [--size 520]."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .export import (
    DEFAULT_PERSON_CLASS,
    DEFAULT_SIZE,
    ExportJob,
    export_probability_maps,
    load_model,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="export-probmaps")
    parser.add_argument("--in", dest="input", required=True, help="directory of frames")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--size", type=int, default=DEFAULT_SIZE,
                        help="square processing resolution")
    parser.add_argument("--model", default="torchvision:deeplabv3_resnet50",
                        help="model spec, torchvision:<name>")
    parser.add_argument("--weights", help="local state-dict file for the model")
    parser.add_argument("--person-class", type=int, default=DEFAULT_PERSON_CLASS,
                        help="channel index of the person class")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not Path(args.input).is_dir():
        print(f"error: input directory {args.input} does not exist", file=sys.stderr)
        return 1
    try:
        model = load_model(args.model, args.weights)
    except Exception as exc:
        print(f"error: model unavailable: {exc}", file=sys.stderr)
        return 1
    job = ExportJob(
        input_dir=Path(args.input),
        output_dir=Path(args.out),
        size=args.size,
        person_class=args.person_class,
    )
    try:
        written = export_probability_maps(job, model)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(p)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
