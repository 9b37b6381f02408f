"""Training-clip assembly: augmentation, compositing branches, compression.

A training clip combines an augmented background sequence with one or two
synthetically animated foregrounds. Branch selection per clip:

* with probability 0.05 the background is used as-is (alpha 0 everywhere),
* otherwise a fair coin picks between compositing both foregrounds over the
  background and using the first foreground clip directly as frames.

Every output frame finally passes through a JPEG encode/decode round trip
at one random quality in [30, 80] drawn per clip; ground-truth alphas and
foregrounds are never degraded.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import cv2
import numpy as np

from . import fileio
from .fakemotion import ForegroundClip, MotionSpec, pairwise_flow, render_foreground_clip
from .imgcore import composite_over, resize_bilinear, warp_backward
from .seeds import mix64

BACKGROUND_ONLY_PROBABILITY = 0.05
JPEG_QUALITY_RANGE = (30, 80)

BRANCH_COMPOSITED = "composited"
BRANCH_FOREGROUND_ONLY = "foreground_only"
BRANCH_BACKGROUND_ONLY = "background_only"

# Axis-aligned content directions for the second foreground's initial offset.
_AXIS_DIRECTIONS = ((-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0))


@dataclass(frozen=True)
class GeomAugmentation:
    """One sampled augmentation; geometry applies to image and alpha alike,
    brightness/contrast to the image only."""

    angle_deg: float
    crop_top: int
    crop_left: int
    crop_height: int
    crop_width: int
    flip: bool
    brightness: float
    contrast: float


@dataclass
class ClipManifest:
    seed: int
    n_frames: int
    height: int
    width: int
    branch: str
    fg1_id: str
    fg2_id: str
    bg_id: str
    bg_start: int
    jpeg_quality: int
    fg1_aug: dict
    fg2_aug: dict
    bg_aug: dict
    fg2_initial_shift: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ClipManifest":
        return cls(**json.loads(text))


@dataclass
class TrainingClip:
    frames: list[np.ndarray]
    gt_alphas: list[np.ndarray]
    gt_foregrounds: list[np.ndarray]
    foreground: ForegroundClip
    manifest: ClipManifest | None = None

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def pairwise_flow(self, l: int, i: int):
        """(flow, validity) from frame i back to frame l of the first
        foreground's ground-truth motion."""
        return pairwise_flow(self.foreground, l, i)


def _sample_augmentation(
    rng: np.random.Generator, h: int, w: int, min_area: float, max_angle: float
) -> GeomAugmentation:
    angle = float(rng.uniform(-max_angle, max_angle)) if max_angle > 0 else 0.0
    frac = float(rng.uniform(min_area, 1.0))
    ch = max(1, int(round(h * math.sqrt(frac))))
    cw = max(1, int(round(w * math.sqrt(frac))))
    ch, cw = min(ch, h), min(cw, w)
    top = int(rng.integers(0, h - ch + 1))
    left = int(rng.integers(0, w - cw + 1))
    flip = bool(rng.random() < 0.5)
    brightness = float(rng.uniform(-0.2, 0.2))
    contrast = float(rng.uniform(0.8, 1.25))
    return GeomAugmentation(angle, top, left, ch, cw, flip, brightness, contrast)


def sample_fg_augmentation(rng: np.random.Generator, h: int, w: int) -> GeomAugmentation:
    """Rotation up to +-15 degrees, crop down to 20% area, flip, photometric."""
    return _sample_augmentation(rng, h, w, min_area=0.2, max_angle=15.0)


def sample_bg_augmentation(rng: np.random.Generator, h: int, w: int) -> GeomAugmentation:
    """Crop down to 8% area, flip, photometric; no rotation."""
    return _sample_augmentation(rng, h, w, min_area=0.08, max_angle=0.0)


def _rotation_flow(h: int, w: int, angle_deg: float) -> np.ndarray:
    theta = math.radians(angle_deg)
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    xs = np.arange(w, dtype=np.float32)[None, :] - cx
    ys = np.arange(h, dtype=np.float32)[:, None] - cy
    # backward map: rotate output coordinates by -angle to find the source
    src_x = c * xs + s * ys + cx
    src_y = -s * xs + c * ys + cy
    flow = np.empty((h, w, 2), dtype=np.float32)
    flow[..., 0] = src_x - np.arange(w, dtype=np.float32)[None, :]
    flow[..., 1] = src_y - np.arange(h, dtype=np.float32)[:, None]
    return flow


def _apply_geometry(raster: np.ndarray, aug: GeomAugmentation) -> np.ndarray:
    h, w = raster.shape[:2]
    out = raster
    if aug.angle_deg != 0.0:
        out = warp_backward(out, _rotation_flow(h, w, aug.angle_deg))
    if (aug.crop_height, aug.crop_width) != (h, w) or (aug.crop_top, aug.crop_left) != (0, 0):
        out = out[
            aug.crop_top : aug.crop_top + aug.crop_height,
            aug.crop_left : aug.crop_left + aug.crop_width,
        ]
        out = resize_bilinear(out, h, w)
    if aug.flip:
        out = out[:, ::-1].copy()
    return out


def _apply_photometric(img: np.ndarray, aug: GeomAugmentation) -> np.ndarray:
    out = img
    if aug.contrast != 1.0:
        out = (out - 0.5) * np.float32(aug.contrast) + 0.5
    if aug.brightness != 0.0:
        out = out + np.float32(aug.brightness)
    if aug.contrast != 1.0 or aug.brightness != 0.0:
        out = np.clip(out, 0.0, 1.0).astype(np.float32)
    return out


def augment_foreground(
    img: np.ndarray, alpha: np.ndarray, rng: np.random.Generator,
    aug: GeomAugmentation | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Augment a portrait and its alpha with one sampled transform."""
    if img.shape[:2] != alpha.shape:
        raise ValueError(f"image {img.shape[:2]} and alpha {alpha.shape} dimensions differ")
    if aug is None:
        aug = sample_fg_augmentation(rng, *alpha.shape)
    return _apply_photometric(_apply_geometry(img, aug), aug), _apply_geometry(alpha, aug)


def augment_background(
    frames: list[np.ndarray], rng: np.random.Generator,
    aug: GeomAugmentation | None = None,
) -> list[np.ndarray]:
    """Augment a background clip; one transform is sampled and applied to
    every frame so the geometry stays temporally consistent."""
    if not frames:
        raise ValueError("background clip is empty")
    if aug is None:
        aug = sample_bg_augmentation(rng, *frames[0].shape[:2])
    return [_apply_photometric(_apply_geometry(f, aug), aug) for f in frames]


def jpeg_degrade(frame: np.ndarray, quality: int) -> np.ndarray:
    """JPEG encode/decode round trip at the given quality (30..80)."""
    lo, hi = JPEG_QUALITY_RANGE
    if not lo <= quality <= hi:
        raise ValueError(f"quality {quality} outside [{lo}, {hi}]")
    u8 = np.clip(np.rint(frame * 255.0), 0, 255).astype(np.uint8)
    ok, buf = cv2.imencode(".jpg", cv2.cvtColor(u8, cv2.COLOR_RGB2BGR),
                           [cv2.IMWRITE_JPEG_QUALITY, int(quality)])
    if not ok:
        raise RuntimeError("JPEG encoding failed")
    decoded = cv2.imdecode(buf, cv2.IMREAD_COLOR)
    return cv2.cvtColor(decoded, cv2.COLOR_BGR2RGB).astype(np.float32) / 255.0


def assemble_clip(
    bg: list[np.ndarray],
    fg1: ForegroundClip,
    fg2: ForegroundClip,
    rng: np.random.Generator,
) -> TrainingClip:
    """Pick a branch, composite, and degrade the output frames.

    Returns a clip whose manifest-relevant draws (branch, JPEG quality) are
    recorded by the caller via the returned ``TrainingClip.manifest`` being
    filled in later; the embedded first foreground provides ground-truth
    flows.
    """
    n = len(bg)
    if not (fg1.n_frames == fg2.n_frames == n):
        raise ValueError("background and foreground clips must have equal length")
    shape = bg[0].shape
    for seq in (bg, fg1.frames, fg2.frames):
        for f in seq:
            if f.shape != shape:
                raise ValueError("all frames must share dimensions")

    if rng.random() < BACKGROUND_ONLY_PROBABILITY:
        branch = BRANCH_BACKGROUND_ONLY
        frames = [f.copy() for f in bg]
        alphas = [np.zeros(shape[:2], dtype=np.float32) for _ in range(n)]
        fgs = [np.zeros(shape, dtype=np.float32) for _ in range(n)]
    elif rng.random() < 0.5:
        branch = BRANCH_COMPOSITED
        frames, alphas, fgs = [], [], []
        for i in range(n):
            a1, a2 = fg1.alphas[i], fg2.alphas[i]
            back = composite_over(fg2.frames[i], a2, bg[i])
            frames.append(composite_over(fg1.frames[i], a1, back))
            alphas.append((a1 + (1.0 - a1) * a2).astype(np.float32))
            fgs.append(composite_over(fg1.frames[i], a1, fg2.frames[i]))
    else:
        branch = BRANCH_FOREGROUND_ONLY
        frames = [f.copy() for f in fg1.frames]
        alphas = [a.copy() for a in fg1.alphas]
        fgs = [f.copy() for f in fg1.frames]

    quality = int(rng.integers(JPEG_QUALITY_RANGE[0], JPEG_QUALITY_RANGE[1] + 1))
    frames = [jpeg_degrade(f, quality) for f in frames]

    clip = TrainingClip(frames=frames, gt_alphas=alphas, gt_foregrounds=fgs, foreground=fg1)
    clip._branch = branch  # consumed by generate_clip when filling the manifest
    clip._jpeg_quality = quality
    return clip


def generate_clip(
    fg_assets: list[tuple[str, np.ndarray, np.ndarray]],
    bg_assets: list[tuple[str, list[np.ndarray]]],
    seed: int,
    n_frames: int = 6,
    height: int = 520,
    width: int = 520,
    spec: MotionSpec | None = None,
) -> TrainingClip:
    """Build one fully deterministic training clip from loaded assets.

    ``fg_assets`` holds (id, rgb, alpha) portraits, ``bg_assets`` (id, frame
    list) background clips. The seed alone fixes asset selection and every
    subsequent draw; a clip regenerates bit-exactly from its manifest's seed
    and asset ids.
    """
    if not fg_assets or not bg_assets:
        raise ValueError("need at least one foreground and one background asset")
    sel_rng = np.random.default_rng(np.random.PCG64(mix64(seed, 0)))
    i1 = int(sel_rng.integers(len(fg_assets)))
    i2 = int(sel_rng.integers(len(fg_assets)))
    ib = int(sel_rng.integers(len(bg_assets)))
    bg_id, bg_frames = bg_assets[ib]
    if len(bg_frames) < n_frames:
        raise ValueError(f"background clip {bg_id} has fewer than {n_frames} frames")
    bg_start = int(sel_rng.integers(len(bg_frames) - n_frames + 1))
    fg1_id, fg1_img, fg1_alpha = fg_assets[i1]
    fg2_id, fg2_img, fg2_alpha = fg_assets[i2]

    clip = build_clip(
        (fg1_img, fg1_alpha),
        (fg2_img, fg2_alpha),
        bg_frames[bg_start : bg_start + n_frames],
        gen_seed=mix64(seed, 1),
        n_frames=n_frames,
        height=height,
        width=width,
        spec=spec,
    )
    m = clip.manifest
    m.seed = seed
    m.fg1_id, m.fg2_id, m.bg_id, m.bg_start = fg1_id, fg2_id, bg_id, bg_start
    return clip


def regenerate_clip(
    manifest: ClipManifest,
    fg_assets: dict[str, tuple[np.ndarray, np.ndarray]],
    bg_assets: dict[str, list[np.ndarray]],
    spec: MotionSpec | None = None,
) -> TrainingClip:
    """Rebuild a clip from its manifest and the original source assets."""
    fg1 = fg_assets[manifest.fg1_id]
    fg2 = fg_assets[manifest.fg2_id]
    bg = bg_assets[manifest.bg_id]
    clip = build_clip(
        fg1, fg2,
        bg[manifest.bg_start : manifest.bg_start + manifest.n_frames],
        gen_seed=mix64(manifest.seed, 1),
        n_frames=manifest.n_frames,
        height=manifest.height,
        width=manifest.width,
        spec=spec,
    )
    m = clip.manifest
    m.seed = manifest.seed
    m.fg1_id, m.fg2_id = manifest.fg1_id, manifest.fg2_id
    m.bg_id, m.bg_start = manifest.bg_id, manifest.bg_start
    return clip


def build_clip(
    fg1_asset: tuple[np.ndarray, np.ndarray],
    fg2_asset: tuple[np.ndarray, np.ndarray],
    bg_frames: list[np.ndarray],
    gen_seed: int,
    n_frames: int = 6,
    height: int = 520,
    width: int = 520,
    spec: MotionSpec | None = None,
) -> TrainingClip:
    """Deterministic clip construction from already-selected assets.

    Draw order (fixed; changing it breaks reproducibility): foreground 1
    augmentation, foreground 2 augmentation, background augmentation,
    foreground 1 motion, foreground 2 initial-shift direction, foreground 2
    motion, branch draws, JPEG quality.
    """
    if spec is None:
        spec = MotionSpec(clip_length=n_frames)
    elif spec.clip_length != n_frames:
        raise ValueError("spec.clip_length must equal n_frames")
    rng = np.random.default_rng(np.random.PCG64(gen_seed))

    def prep(img, alpha):
        img = img if img.shape[:2] == (height, width) else resize_bilinear(img, height, width)
        alpha = alpha if alpha.shape == (height, width) else resize_bilinear(alpha, height, width)
        return img, alpha

    img1, alpha1 = prep(*fg1_asset)
    img2, alpha2 = prep(*fg2_asset)
    bg = [
        f if f.shape[:2] == (height, width) else resize_bilinear(f, height, width)
        for f in bg_frames[:n_frames]
    ]

    aug1 = sample_fg_augmentation(rng, height, width)
    img1, alpha1 = augment_foreground(img1, alpha1, rng, aug=aug1)
    aug2 = sample_fg_augmentation(rng, height, width)
    img2, alpha2 = augment_foreground(img2, alpha2, rng, aug=aug2)
    bg_aug = sample_bg_augmentation(rng, height, width)
    bg = augment_background(bg, rng, aug=bg_aug)

    fg1 = render_foreground_clip(img1, alpha1, spec, rng)
    direction = _AXIS_DIRECTIONS[int(rng.integers(4))]
    magnitude = width / 2.0 if direction[0] != 0.0 else height / 2.0
    init = (-direction[0] * magnitude, -direction[1] * magnitude)
    fg2 = render_foreground_clip(img2, alpha2, spec, rng, initial_shift=init)

    clip = assemble_clip(bg, fg1, fg2, rng)
    clip.manifest = ClipManifest(
        seed=0,
        n_frames=n_frames,
        height=height,
        width=width,
        branch=clip._branch,
        fg1_id="",
        fg2_id="",
        bg_id="",
        bg_start=0,
        jpeg_quality=clip._jpeg_quality,
        fg1_aug=asdict(aug1),
        fg2_aug=asdict(aug2),
        bg_aug=asdict(bg_aug),
        fg2_initial_shift=[float(init[0]), float(init[1])],
    )
    return clip


def save_clip(directory: str | Path, clip: TrainingClip) -> None:
    """Write a clip directory: frames, alphas, foregrounds, flows from the
    first frame, validity masks and the manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    n = clip.n_frames
    for i in range(1, n + 1):
        fileio.write_rgb8(d / f"frame_{i:04d}.png", clip.frames[i - 1])
        fileio.write_gray16(d / f"alpha_{i:04d}.png", clip.gt_alphas[i - 1])
        fileio.write_rgb8(d / f"fg_{i:04d}.png", clip.gt_foregrounds[i - 1])
    for i in range(2, n + 1):
        flow, valid = clip.pairwise_flow(1, i)
        fileio.write_flo(d / f"flow_0001_to_{i:04d}.flo", flow)
        fileio.write_mask(d / f"valid_0001_to_{i:04d}.png", valid)
    if clip.manifest is not None:
        (d / "manifest.json").write_text(clip.manifest.to_json(), encoding="utf-8")


def load_clip_dir(directory: str | Path) -> dict:
    """Read a clip directory back into arrays keyed by role."""
    d = Path(directory)
    frames = sorted(d.glob("frame_*.png"))
    if not frames:
        raise FileNotFoundError(f"no frames in {d}")
    n = len(frames)
    out = {
        "frames": [fileio.read_rgb8(d / f"frame_{i:04d}.png") for i in range(1, n + 1)],
        "alphas": [fileio.read_gray16(d / f"alpha_{i:04d}.png") for i in range(1, n + 1)],
        "foregrounds": [fileio.read_rgb8(d / f"fg_{i:04d}.png") for i in range(1, n + 1)],
        "flows_from_first": [
            fileio.read_flo(d / f"flow_0001_to_{i:04d}.flo") for i in range(2, n + 1)
        ],
        "valid_from_first": [
            fileio.read_mask(d / f"valid_0001_to_{i:04d}.png") for i in range(2, n + 1)
        ],
    }
    manifest_path = d / "manifest.json"
    if manifest_path.exists():
        out["manifest"] = ClipManifest.from_json(manifest_path.read_text(encoding="utf-8"))
    return out
