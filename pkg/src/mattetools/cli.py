"""Command-line interface.

Subcommands: ``gen`` (training clips), ``flow`` (block-matching flows and
consistency maps), ``smooth`` (probability-map smoothing), ``trimap``,
``losses`` and ``metrics`` (JSON reports). Options can come from a JSON
config file (``--config``); explicit flags override config values.

Clip ``k`` of a generation run is seeded with ``mix64(master_seed, k)``, so
any worker count or completion order yields byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import clipforge, fileio
from .blockflow import BlockMEParams, flow_pyramid_for_video
from .imgcore import validity_mask
from .matteval import compute_losses, temporal_metrics
from .probsmooth import make_trimap, smooth_sequence
from .seeds import mix64

DEFAULT_N_FRAMES = 6
DEFAULT_SIZE = (520, 520)  # (width, height)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 520x520, got {text!r}")


_GEN_DEFAULTS = {
    "seed": 0,
    "clips": 1,
    "frames": DEFAULT_N_FRAMES,
    "size": DEFAULT_SIZE,
    "workers": 1,
    "fg_dir": None,
    "bg_dir": None,
    "out": None,
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Overlay config-file values under explicitly passed flags."""
    if not getattr(args, "config", None):
        return args
    with open(args.config, encoding="utf-8") as f:
        cfg = json.load(f)
    for key, value in cfg.items():
        if key not in _GEN_DEFAULTS:
            raise SystemExit(f"unknown config key: {key}")
        if getattr(args, key) == _GEN_DEFAULTS[key]:
            if key == "size" and isinstance(value, str):
                value = _parse_size(value)
            setattr(args, key, value)
    return args


def _load_fg_assets(fg_dir: Path) -> list[tuple[str, np.ndarray, np.ndarray]]:
    assets = []
    for alpha_path in sorted(fg_dir.glob("*_alpha.png")):
        stem = alpha_path.name[: -len("_alpha.png")]
        img_path = fg_dir / f"{stem}.png"
        if not img_path.exists():
            continue
        assets.append((stem, fileio.read_rgb8(img_path), fileio.read_gray16(alpha_path)))
    if not assets:
        raise SystemExit(
            f"no foreground assets in {fg_dir} (expected <id>.png + <id>_alpha.png pairs)"
        )
    return assets


def _load_bg_assets(bg_dir: Path) -> list[tuple[str, list[np.ndarray]]]:
    assets = []
    for sub in sorted(p for p in bg_dir.iterdir() if p.is_dir()):
        frames = [fileio.read_rgb8(p) for p in sorted(sub.glob("*.png"))]
        if frames:
            assets.append((sub.name, frames))
    if not assets:
        raise SystemExit(f"no background clips in {bg_dir} (expected subdirectories of PNGs)")
    return assets


def _gen_one(k: int, args, fg_assets, bg_assets) -> str:
    width, height = args.size
    out_dir = Path(args.out) / f"clip_{k:06d}"
    try:
        clip = clipforge.generate_clip(
            fg_assets, bg_assets,
            seed=mix64(args.seed, k),
            n_frames=args.frames, height=height, width=width,
        )
        clipforge.save_clip(out_dir, clip)
    except Exception:
        if out_dir.exists():
            shutil.rmtree(out_dir)
        raise
    return str(out_dir)


def cmd_gen(args) -> int:
    for name in ("fg_dir", "bg_dir", "out"):
        if getattr(args, name) is None:
            print(f"error: --{name.replace('_', '-')} is required (flag or config)",
                  file=sys.stderr)
            return 1
    fg_dir, bg_dir = Path(args.fg_dir), Path(args.bg_dir)
    if not fg_dir.is_dir():
        print(f"error: foreground directory {fg_dir} does not exist", file=sys.stderr)
        return 1
    if not bg_dir.is_dir():
        print(f"error: background directory {bg_dir} does not exist", file=sys.stderr)
        return 1
    fg_assets = _load_fg_assets(fg_dir)
    bg_assets = _load_bg_assets(bg_dir)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    if args.workers > 1 and args.clips > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [
                pool.submit(_gen_one, k, args, fg_assets, bg_assets)
                for k in range(args.clips)
            ]
            for fut in futures:
                print(fut.result())
    else:
        for k in range(args.clips):
            print(_gen_one(k, args, fg_assets, bg_assets))
    return 0


def _read_frames_dir(directory: Path) -> list[np.ndarray]:
    paths = sorted(directory.glob("*.png")) + sorted(directory.glob("*.jpg"))
    if not paths:
        raise SystemExit(f"no frames found in {directory}")
    return [fileio.read_rgb8(p) for p in paths]


def cmd_flow(args) -> int:
    frames = _read_frames_dir(Path(args.input))
    params = BlockMEParams(block_size=args.block_size, search_radius=args.search_radius)
    fwd, bwd, cons = flow_pyramid_for_video(frames, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, flow in enumerate(fwd, start=2):
        fileio.write_flo(out / f"F_{i:04d}.flo", flow)
    for i, flow in enumerate(bwd, start=1):
        fileio.write_flo(out / f"B_{i:04d}.flo", flow)
    for i, c in enumerate(cons, start=2):
        fileio.write_gray16(out / f"C_{i:04d}.png", c)
    return 0


def cmd_smooth(args) -> int:
    probs_dir, flow_dir = Path(args.probs), Path(args.flows)
    prob_paths = sorted(probs_dir.glob("*.png"))
    if not prob_paths:
        raise SystemExit(f"no probability maps found in {probs_dir}")
    probs = [fileio.read_gray16(p) for p in prob_paths]
    n = len(probs)
    flows = [fileio.read_flo(flow_dir / f"F_{i:04d}.flo") for i in range(2, n + 1)]
    cons = [fileio.read_gray16(flow_dir / f"C_{i:04d}.png") for i in range(2, n + 1)]
    smoothed = smooth_sequence(probs, flows, cons)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for path, a in zip(prob_paths, smoothed):
        fileio.write_gray16(out / path.name, a)
    return 0


def cmd_trimap(args) -> int:
    in_dir = Path(args.input)
    paths = sorted(in_dir.glob("*.png"))
    if not paths:
        raise SystemExit(f"no segmentation maps found in {in_dir}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    import cv2

    for p in paths:
        seg = fileio.read_gray16(p)
        trimap = make_trimap(seg, args.fraction)
        cv2.imwrite(str(out / p.name), trimap)
    return 0


def _consecutive_flow_pairs(flows_from_first, valid_shape):
    """(i-1)->i flows from the stored 1->i flows, with validity masks."""
    h, w = valid_shape
    pairs = []
    prev = np.zeros((h, w, 2), dtype=np.float32)
    for flow in flows_from_first:
        local = flow - prev
        pairs.append((local, validity_mask(local, h, w)))
        prev = flow
    return pairs


def cmd_losses(args) -> int:
    clip = clipforge.load_clip_dir(args.clip)
    pred_dir = Path(args.pred)
    n = len(clip["alphas"])
    pred = [fileio.read_gray16(pred_dir / f"alpha_{i:04d}.png") for i in range(1, n + 1)]
    h, w = pred[0].shape
    from_first = list(zip(clip["flows_from_first"], clip["valid_from_first"]))
    consecutive = _consecutive_flow_pairs(clip["flows_from_first"], (h, w))
    pred_fg = None
    if (pred_dir / "fg_0001.png").exists():
        pred_fg = [fileio.read_rgb8(pred_dir / f"fg_{i:04d}.png") for i in range(1, n + 1)]
    report = compute_losses(
        pred, clip["alphas"], from_first, consecutive,
        pred_fg=pred_fg, gt_fg=clip["foregrounds"] if pred_fg is not None else None,
    )
    _emit_report(report.as_dict(), args.out)
    return 0


def cmd_metrics(args) -> int:
    clip = clipforge.load_clip_dir(args.clip)
    pred_dir = Path(args.pred)
    n = len(clip["alphas"])
    pred = [fileio.read_gray16(pred_dir / f"alpha_{i:04d}.png") for i in range(1, n + 1)]
    h, w = pred[0].shape
    local_flows = [flow for flow, _ in _consecutive_flow_pairs(clip["flows_from_first"], (h, w))]
    report = temporal_metrics(pred, clip["alphas"], local_flows)
    _emit_report(report.as_dict(), args.out)
    return 0


def _emit_report(report: dict, out: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mattetools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate training clips")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--clips", type=int, default=1, help="number of clips")
    p.add_argument("--frames", type=int, default=DEFAULT_N_FRAMES, help="frames per clip")
    p.add_argument("--size", type=_parse_size, default=DEFAULT_SIZE, metavar="WxH")
    p.add_argument("--fg-dir", help="directory of <id>.png + <id>_alpha.png")
    p.add_argument("--bg-dir", help="directory of background clip subdirectories")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("flow", help="estimate flows and consistency maps")
    p.add_argument("--in", dest="input", required=True, help="directory of frames")
    p.add_argument("--out", required=True)
    p.add_argument("--block-size", type=int, default=16)
    p.add_argument("--search-radius", type=int, default=16)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("smooth", help="temporally smooth probability maps")
    p.add_argument("--probs", required=True, help="directory of 16-bit probability maps")
    p.add_argument("--flows", required=True, help="output directory of the flow command")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("trimap", help="generate trimaps from segmentation maps")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fraction", type=float, default=0.01,
                   help="morphology iterations as a fraction of image width")
    p.set_defaults(func=cmd_trimap)

    p = sub.add_parser("losses", help="loss report for a prediction directory")
    p.add_argument("--clip", required=True, help="generated clip directory")
    p.add_argument("--pred", required=True, help="directory of predicted alpha_%%04d.png")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_losses)

    p = sub.add_parser("metrics", help="temporal quality metrics report")
    p.add_argument("--clip", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "config"):
        args = _merge_config(args)
    try:
        return args.func(args)
    except (fileio.FileFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
