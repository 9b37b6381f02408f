"""Probability-map export pipeline.

For each input frame: bilinearly resize to the processing resolution, run
the segmentation model, softmax over the class channels, extract the
person-class channel, resize back to the frame's own resolution and write
it as a 16-bit gray PNG (value / 65535). Output files keep their input
names, so a frame_%04d.png sequence stays a frame_%04d.png sequence.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
import torch
import torch.nn.functional as F

# ImageNet statistics used by the torchvision segmentation weights.
NORMALIZE_MEAN = (0.485, 0.456, 0.406)
NORMALIZE_STD = (0.229, 0.224, 0.225)

# In the VOC class ordering used by the torchvision models, person is 15.
DEFAULT_PERSON_CLASS = 15
DEFAULT_SIZE = 520


@dataclass
class ExportJob:
    input_dir: Path
    output_dir: Path
    size: int = DEFAULT_SIZE
    person_class: int = DEFAULT_PERSON_CLASS

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output_dir = Path(self.output_dir)
        if self.size < 1:
            raise ValueError("processing size must be >= 1")
        if self.person_class < 0:
            raise ValueError("person_class must be >= 0")


def read_frame(path: Path) -> np.ndarray:
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise ValueError(f"{path}: not a readable image")
    return cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB).astype(np.float32) / 255.0


def write_probability(path: Path, prob: np.ndarray) -> None:
    u16 = np.clip(np.rint(prob * 65535.0), 0, 65535).astype(np.uint16)
    if not cv2.imwrite(str(path), u16):
        raise IOError(f"failed to write {path}")


def load_model(spec: str, weights: str | None, device: str = "cpu") -> torch.nn.Module:
    """Build a segmentation model from a ``torchvision:<name>`` spec.

    ``weights`` may point to a local state-dict file; without it the
    torchvision pretrained weights are requested, which needs them present
    in the local cache.
    """
    kind, _, name = spec.partition(":")
    if kind != "torchvision" or not name:
        raise ValueError(f"unsupported model spec {spec!r} (expected torchvision:<name>)")
    import torchvision.models.segmentation as seg

    factory = getattr(seg, name, None)
    if factory is None:
        raise ValueError(f"unknown torchvision segmentation model {name!r}")
    if weights:
        model = factory(weights=None, weights_backbone=None)
        state = torch.load(weights, map_location=device, weights_only=True)
        model.load_state_dict(state)
    else:
        model = factory(weights="DEFAULT")
    model.to(device)
    model.eval()
    return model


def frame_to_probability(
    frame: np.ndarray, model: torch.nn.Module, size: int, person_class: int
) -> np.ndarray:
    """Person probability for one (H, W, 3) float frame in [0, 1]."""
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) frame, got shape {frame.shape}")
    h, w = frame.shape[:2]
    x = torch.from_numpy(np.ascontiguousarray(frame.transpose(2, 0, 1)))[None]
    x = F.interpolate(x, size=(size, size), mode="bilinear", align_corners=False)
    mean = torch.tensor(NORMALIZE_MEAN).view(1, 3, 1, 1)
    std = torch.tensor(NORMALIZE_STD).view(1, 3, 1, 1)
    x = (x - mean) / std
    with torch.no_grad():
        out = model(x)
    logits = out["out"] if isinstance(out, dict) else out
    if person_class >= logits.shape[1]:
        raise ValueError(
            f"person_class {person_class} out of range for a "
            f"{logits.shape[1]}-channel model"
        )
    prob = torch.softmax(logits, dim=1)[:, person_class : person_class + 1]
    prob = F.interpolate(prob, size=(h, w), mode="bilinear", align_corners=False)
    return prob[0, 0].clamp(0.0, 1.0).numpy().astype(np.float32)


def export_probability_maps(job: ExportJob, model: torch.nn.Module) -> list[Path]:
    """Process every frame in the job's input directory.

    Per-frame failures are reported on stderr and skipped; the remaining
    frames are still processed. Returns the written paths.
    """
    paths = sorted(job.input_dir.glob("*.png")) + sorted(job.input_dir.glob("*.jpg"))
    if not paths:
        raise FileNotFoundError(f"no frames found in {job.input_dir}")
    job.output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in paths:
        try:
            frame = read_frame(path)
            prob = frame_to_probability(frame, model, job.size, job.person_class)
            out_path = job.output_dir / (path.stem + ".png")
            write_probability(out_path, prob)
            written.append(out_path)
        except Exception as exc:
            print(f"warning: skipping {path.name}: {exc}", file=sys.stderr)
    return written
