"""Synthetic multi-scale motion for animating still portraits into clips.

A clip's total displacement is the sum of three random flow fields drawn at
different grid resolutions and upscaled to frame size. Frame ``i`` of the
clip is the source warped once by the cumulative fraction ``(i-1)/N`` of the
total, plus optional shift components (an exit-and-return excursion, and a
constant initial offset used to separate a second foreground).

All shift vectors are expressed in the backward-sampling flow convention of
:mod:`mattetools.imgcore`: a flow of ``(-s, 0)`` moves content right by ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import _axis_weights, validity_mask, warp_backward

# (grid divisor, standard deviation); divisor None = a single 1x1 vector.
DEFAULT_SCALES: tuple[tuple[int | None, float], ...] = (
    (None, 32.0),
    (128, 16.0),
    (32, 4.0),
)

OPACITY_THRESHOLD = 0.05

# Content-motion direction of each frame side, and the opposite side whose
# boundary must be free of opaque pixels for the shift to be admissible.
_SIDES = (
    ("left", (-1.0, 0.0), "right"),
    ("right", (1.0, 0.0), "left"),
    ("up", (0.0, -1.0), "down"),
    ("down", (0.0, 1.0), "up"),
)


@dataclass(frozen=True)
class MotionSpec:
    """Parameters of the synthetic-motion generator."""

    clip_length: int = 6
    scale_params: tuple[tuple[int | None, float], ...] = DEFAULT_SCALES
    exit_shift_probability: float = 1.0 / 3.0

    def __post_init__(self):
        if self.clip_length < 2:
            raise ValueError("clip_length must be >= 2")
        for divisor, sigma in self.scale_params:
            if divisor is not None and divisor <= 0:
                raise ValueError("grid divisors must be positive")
            if sigma <= 0:
                raise ValueError("sigmas must be positive")


@dataclass
class ForegroundClip:
    """A still portrait animated into N frames with exact ground-truth flow.

    ``cumulative_flows[i-1]`` is the full flow field frame ``i`` was warped
    with; warping the source by it reproduces ``frames[i-1]`` bit-exactly.
    """

    frames: list[np.ndarray]
    alphas: list[np.ndarray]
    cumulative_flows: list[np.ndarray]
    total_flow: np.ndarray

    def __post_init__(self):
        n = len(self.frames)
        if not (len(self.alphas) == len(self.cumulative_flows) == n):
            raise ValueError("frames, alphas and cumulative_flows must have equal length")

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def synth_total_flow(
    height: int, width: int, spec: MotionSpec, rng: np.random.Generator
) -> np.ndarray:
    """Draw the clip's total displacement field at ``height x width``.

    One 1x1 vector at sigma 32, an (H//128 x W//128) grid at sigma 16 and an
    (H//32 x W//32) grid at sigma 4, each bilinearly upscaled to frame size
    and summed. The result is the TOTAL displacement over the clip, not yet
    divided by the frame count.
    """
    if height < 128 or width < 128:
        raise ValueError("frame dimensions must be >= 128 (mid-scale grid would be empty)")
    constant = np.zeros(2, dtype=np.float32)
    varying = None  # accumulated in (W, H, 2) layout to skip per-scale copies
    for divisor, sigma in spec.scale_params:
        if divisor is None:
            gh = gw = 1
        else:
            gh, gw = height // divisor, width // divisor
        grid = rng.normal(0.0, sigma, size=(gh, gw, 2)).astype(np.float32)
        if gh == 1 and gw == 1:
            constant += grid[0, 0]
        else:
            wy = _axis_weights(height, gh)
            wx = _axis_weights(width, gw)
            up = np.tensordot(wx, np.tensordot(wy, grid, (1, 0)), (1, 1))
            varying = up if varying is None else varying + up
    total = np.empty((height, width, 2), dtype=np.float32)
    if varying is None:
        total[:] = constant
    else:
        np.add(np.swapaxes(varying, 0, 1), constant, out=total)
    return total


def cumulative_flow(total: np.ndarray, frame_index: int, n_frames: int) -> np.ndarray:
    """Flow from frame ``i`` back to the source: ``(i-1)/N`` of the total."""
    if not 1 <= frame_index <= n_frames:
        raise ValueError(f"frame_index {frame_index} out of range 1..{n_frames}")
    return (total * ((frame_index - 1) / n_frames)).astype(np.float32)


def _admissible_sides(alpha: np.ndarray, threshold: float) -> list[tuple[str, tuple[float, float]]]:
    boundary = {
        "left": alpha[:, 0],
        "right": alpha[:, -1],
        "up": alpha[0, :],
        "down": alpha[-1, :],
    }
    out = []
    for name, direction, opposite in _SIDES:
        if not np.any(boundary[opposite] > threshold):
            out.append((name, direction))
    return out


def exit_return_shift(
    alpha: np.ndarray,
    n_frames: int,
    rng: np.random.Generator,
    probability: float = 1.0 / 3.0,
    opacity_threshold: float = OPACITY_THRESHOLD,
) -> np.ndarray:
    """Shift schedule that moves the person halfway out of frame and back.

    Applied with the given probability; otherwise (or when no frame side is
    admissible) all shifts are zero. A side is admissible when the opposite
    boundary row/column holds no pixel with alpha above the threshold, which
    keeps border replication from smearing part of the person. The schedule
    is triangular with zero shift on the first and last frames.

    Returns an ``(N, 2)`` array of constant flow vectors.
    """
    shifts = np.zeros((n_frames, 2), dtype=np.float32)
    if rng.random() >= probability:
        return shifts
    sides = _admissible_sides(alpha, opacity_threshold)
    if not sides:
        return shifts
    _, direction = sides[int(rng.integers(len(sides)))]
    h, w = alpha.shape
    magnitude = w / 2.0 if direction[0] != 0.0 else h / 2.0
    for i in range(n_frames):
        t = i / (n_frames - 1)
        tri = 2.0 * t if t <= 0.5 else 2.0 * (1.0 - t)
        # content motion d maps to flow -d in the backward-sampling convention
        shifts[i, 0] = -direction[0] * magnitude * tri
        shifts[i, 1] = -direction[1] * magnitude * tri
    return shifts


def render_foreground_clip(
    fg: np.ndarray,
    alpha: np.ndarray,
    spec: MotionSpec,
    rng: np.random.Generator,
    initial_shift: tuple[float, float] = (0.0, 0.0),
    total_flow: np.ndarray | None = None,
    shifts: np.ndarray | None = None,
) -> ForegroundClip:
    """Animate a portrait and its alpha into an N-frame foreground clip.

    Every frame is warped ONCE from the source by its full cumulative flow
    (never chained from the previous frame), so stored flows regenerate
    stored frames exactly. ``total_flow`` and ``shifts`` default to fresh
    draws from ``rng``; they can be passed explicitly for reproduction.
    """
    if fg.shape[:2] != alpha.shape:
        raise ValueError(f"foreground {fg.shape[:2]} and alpha {alpha.shape} dimensions differ")
    h, w = alpha.shape
    n = spec.clip_length
    if total_flow is None:
        total_flow = synth_total_flow(h, w, spec, rng)
    if shifts is None:
        shifts = exit_return_shift(alpha, n, rng, spec.exit_shift_probability)
    init = np.asarray(initial_shift, dtype=np.float32)

    frames, alphas, flows = [], [], []
    for i in range(1, n + 1):
        eff = cumulative_flow(total_flow, i, n) + shifts[i - 1] + init
        eff = eff.astype(np.float32)
        frames.append(warp_backward(fg, eff))
        alphas.append(warp_backward(alpha, eff))
        flows.append(eff)
    return ForegroundClip(frames=frames, alphas=alphas, cumulative_flows=flows, total_flow=total_flow)


def pairwise_flow(clip: ForegroundClip, l: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Backward flow from frame ``i`` to frame ``l`` plus its validity mask.

    Approximated as the difference of cumulative flows evaluated at frame-i
    pixels; exact whenever the total flow is spatially constant.
    """
    n = clip.n_frames
    if not (1 <= l < i <= n):
        raise ValueError(f"need 1 <= l < i <= {n}, got l={l}, i={i}")
    flow = (clip.cumulative_flows[i - 1] - clip.cumulative_flows[l - 1]).astype(np.float32)
    h, w = flow.shape[:2]
    return flow, validity_mask(flow, h, w)
