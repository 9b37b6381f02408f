"""Core raster operations: warping, resampling, compositing, validity masks.

Conventions used throughout the package:

* Images are numpy arrays, ``float32``, values in [0, 1]. RGB images have
  shape ``(H, W, 3)``, gray maps (alpha, probability, confidence) ``(H, W)``.
* Flow fields have shape ``(H, W, 2)`` storing ``(dx, dy)`` in pixels, with
  backward sampling: ``out(x, y) = src(x + dx, y + dy)``.
* ``x`` is the column index, ``y`` the row index, origin at the top-left.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

LUMA_R = 0.299
LUMA_G = 0.587
LUMA_B = 0.114


def _check_flow_matches(src: np.ndarray, flow: np.ndarray) -> None:
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"flow must have shape (H, W, 2), got {flow.shape}")
    if src.shape[:2] != flow.shape[:2]:
        raise ValueError(
            f"flow dimensions {flow.shape[:2]} do not match raster {src.shape[:2]}"
        )


def sample_bilinear(src: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinearly sample ``src`` at float coordinates, clamping to the border.

    ``xs``/``ys`` are arrays of equal shape; the result has that shape plus
    the channel dimensions of ``src``. Integer coordinates reproduce source
    pixels exactly.
    """
    h, w = src.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0).astype(src.dtype)
    fy = (ys - y0).astype(src.dtype)
    if src.ndim > 2:
        fx = fx[..., None]
        fy = fy[..., None]
    top = src[y0, x0] * (1.0 - fx) + src[y0, x1] * fx
    bot = src[y1, x0] * (1.0 - fx) + src[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def warp_backward(src: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """Warp a raster by a backward-sampling flow field.

    ``out(x, y) = src(x + dx, y + dy)``, bilinear, with border replication
    for out-of-bounds samples. Zero flow is a bit-exact identity.
    """
    _check_flow_matches(src, flow)
    h, w = src.shape[:2]
    xs = np.arange(w, dtype=flow.dtype)[None, :] + flow[..., 0]
    ys = np.arange(h, dtype=flow.dtype)[:, None] + flow[..., 1]
    return sample_bilinear(src, xs, ys)


def validity_mask(flow: np.ndarray, src_height: int, src_width: int) -> np.ndarray:
    """Binary mask of pixels whose flow correspondence lands inside the source.

    1 where ``x + dx`` is in [0, src_width - 1] and ``y + dy`` in
    [0, src_height - 1], else 0. Returned as float32 in {0, 1}.
    """
    h, w = flow.shape[:2]
    xs = np.arange(w, dtype=np.float64)[None, :] + flow[..., 0]
    ys = np.arange(h, dtype=np.float64)[:, None] + flow[..., 1]
    ok = (xs >= 0.0) & (xs <= src_width - 1.0) & (ys >= 0.0) & (ys <= src_height - 1.0)
    return ok.astype(np.float32)


def composite_over(fg: np.ndarray, alpha: np.ndarray, bg: np.ndarray) -> np.ndarray:
    """Alpha-composite ``fg`` over ``bg``: ``out = a*fg + (1-a)*bg``."""
    if fg.shape != bg.shape:
        raise ValueError(f"foreground shape {fg.shape} != background shape {bg.shape}")
    if alpha.shape != fg.shape[:2]:
        raise ValueError(f"alpha shape {alpha.shape} does not match {fg.shape[:2]}")
    a = alpha[..., None] if fg.ndim == 3 else alpha
    return (a * fg + (1.0 - a) * bg).astype(fg.dtype, copy=False)


def _axis_coords(new_size: int, old_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source indices and weights for one axis, half-pixel-center mapping."""
    scale = old_size / new_size
    coords = (np.arange(new_size, dtype=np.float64) + 0.5) * scale - 0.5
    coords = np.clip(coords, 0.0, old_size - 1.0)
    i0 = np.floor(coords).astype(np.intp)
    i1 = np.minimum(i0 + 1, old_size - 1)
    frac = (coords - i0).astype(np.float32)
    return i0, i1, frac


@lru_cache(maxsize=64)
def _axis_weights(new_size: int, old_size: int) -> np.ndarray:
    """Dense (new, old) interpolation matrix for one axis."""
    i0, i1, frac = _axis_coords(new_size, old_size)
    m = np.zeros((new_size, old_size), dtype=np.float32)
    m[np.arange(new_size), i0] += 1.0 - frac
    m[np.arange(new_size), i1] += frac
    m.setflags(write=False)
    return m


# Below this source pixel count, resizing via dense per-axis weight matrices
# (BLAS) beats fancy-indexed gathers; matters for upscaling small flow grids.
_DENSE_RESIZE_LIMIT = 4096


def resize_bilinear(src: np.ndarray, new_height: int, new_width: int) -> np.ndarray:
    """Separable bilinear resize with half-pixel-center coordinate mapping.

    Resizing to the source dimensions is a bit-exact identity.
    """
    if new_height < 1 or new_width < 1:
        raise ValueError("target dimensions must be >= 1")
    h, w = src.shape[:2]
    if h * w <= _DENSE_RESIZE_LIMIT:
        wy = _axis_weights(new_height, h)
        wx = _axis_weights(new_width, w)
        tmp = np.tensordot(wy, src.astype(np.float32, copy=False), (1, 0))
        out = np.swapaxes(np.tensordot(wx, tmp, (1, 1)), 0, 1)
        return np.ascontiguousarray(out, dtype=src.dtype)
    y0, y1, fy = _axis_coords(new_height, h)
    x0, x1, fx = _axis_coords(new_width, w)
    if src.ndim > 2:
        fy_b = fy[:, None, None]
        fx_b = fx[None, :, None]
    else:
        fy_b = fy[:, None]
        fx_b = fx[None, :]
    tmp = src[y0] * (1.0 - fy_b) + src[y1] * fy_b
    out = tmp[:, x0] * (1.0 - fx_b) + tmp[:, x1] * fx_b
    return out.astype(src.dtype, copy=False)


def luma(img: np.ndarray) -> np.ndarray:
    """ITU-R BT.601 luma: 0.299 R + 0.587 G + 0.114 B."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    return (
        LUMA_R * img[..., 0] + LUMA_G * img[..., 1] + LUMA_B * img[..., 2]
    ).astype(np.float32)
