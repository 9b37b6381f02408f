"""File interchange: 8-bit RGB frames, 16-bit gray maps, Middlebury .flo flow.

Gray maps (alpha, probability, consistency) are stored as 16-bit
single-channel PNG, value ``v`` encoding ``v / 65535``. Binary validity
masks are 8-bit PNG with values {0, 255}.
"""

from __future__ import annotations

import struct
from pathlib import Path

import cv2
import numpy as np

FLO_MAGIC = 202021.25


class FileFormatError(ValueError):
    """Raised when an interchange file is malformed."""


def write_rgb8(path: str | Path, img: np.ndarray) -> None:
    """Write an (H, W, 3) float image in [0, 1] as an 8-bit RGB PNG."""
    u8 = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    if not cv2.imwrite(str(path), cv2.cvtColor(u8, cv2.COLOR_RGB2BGR)):
        raise IOError(f"failed to write {path}")


def read_rgb8(path: str | Path) -> np.ndarray:
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise FileFormatError(f"{path}: not a readable 8-bit RGB image")
    return (cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB).astype(np.float32)) / 255.0


def write_gray16(path: str | Path, gray: np.ndarray) -> None:
    """Write an (H, W) float map in [0, 1] as a 16-bit gray PNG."""
    u16 = np.clip(np.rint(gray * 65535.0), 0, 65535).astype(np.uint16)
    if not cv2.imwrite(str(path), u16):
        raise IOError(f"failed to write {path}")


def read_gray16(path: str | Path) -> np.ndarray:
    """Read a single-channel map; accepts 16-bit or 8-bit files."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FileFormatError(f"{path}: not a readable gray image")
    if raw.ndim == 3:
        raw = raw[..., 0]
    if raw.dtype == np.uint16:
        return raw.astype(np.float32) / 65535.0
    if raw.dtype == np.uint8:
        return raw.astype(np.float32) / 255.0
    raise FileFormatError(f"{path}: unsupported bit depth {raw.dtype}")


def write_mask(path: str | Path, mask: np.ndarray) -> None:
    """Write a binary {0, 1} mask as an 8-bit PNG with values {0, 255}."""
    u8 = np.where(mask > 0.5, 255, 0).astype(np.uint8)
    if not cv2.imwrite(str(path), u8):
        raise IOError(f"failed to write {path}")


def read_mask(path: str | Path) -> np.ndarray:
    raw = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise FileFormatError(f"{path}: not a readable mask image")
    return (raw > 127).astype(np.float32)


def write_flo(path: str | Path, flow: np.ndarray) -> None:
    """Write an (H, W, 2) flow field in Middlebury .flo format.

    Little-endian: float32 magic 202021.25, int32 width, int32 height, then
    row-major interleaved float32 (dx, dy).
    """
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"flow must have shape (H, W, 2), got {flow.shape}")
    h, w = flow.shape[:2]
    with open(path, "wb") as f:
        f.write(struct.pack("<fii", FLO_MAGIC, w, h))
        f.write(flow.astype("<f4").tobytes())


def read_flo(path: str | Path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(12)
        if len(header) < 12:
            raise FileFormatError(f"{path}: truncated header at byte {len(header)}")
        magic, w, h = struct.unpack("<fii", header)
        if magic != FLO_MAGIC:
            raise FileFormatError(f"{path}: bad magic {magic!r} at byte 0")
        if w <= 0 or h <= 0:
            raise FileFormatError(f"{path}: bad dimensions {w}x{h} at byte 4")
        payload = f.read(8 * w * h)
        if len(payload) < 8 * w * h:
            raise FileFormatError(
                f"{path}: truncated payload at byte {12 + len(payload)}"
            )
        return np.frombuffer(payload, dtype="<f4").reshape(h, w, 2).copy()
