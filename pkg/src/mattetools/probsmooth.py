"""Temporal smoothing of person-probability maps and trimap generation.

Smoothing is a forward recurrence: each frame's probability is blended with
the motion-compensated previous result, weighted by how confident the
segmentation is at that pixel and by how consistent the estimated motion is.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import binary_dilation, binary_erosion

from .imgcore import warp_backward

TRIMAP_BACKGROUND = 0
TRIMAP_UNKNOWN = 128
TRIMAP_FOREGROUND = 255


def confidence(p: np.ndarray) -> np.ndarray:
    """Pixel-wise segmentation confidence ``4 (p - 1/2)^2``.

    1 where the probability is saturated at 0 or 1, 0 at p = 1/2.
    """
    return (4.0 * (p - 0.5) ** 2).astype(np.float32)


def smooth_sequence(
    probs: list[np.ndarray],
    flows: list[np.ndarray],
    consistencies: list[np.ndarray],
) -> list[np.ndarray]:
    """Smooth a probability-map sequence along estimated motion.

    ``flows[i-1]`` and ``consistencies[i-1]`` belong to frame ``i`` (the
    forward flow F_i and consistency C_i, i >= 2). The first frame passes
    through unchanged; afterwards

        A_i = s_i * p_i + (1 - s_i) * (C_i * warp(A_{i-1}, F_i))

    with s_i the confidence of p_i. Outputs are clamped to [0, 1].
    """
    n = len(probs)
    if len(flows) != n - 1 or len(consistencies) != n - 1:
        raise ValueError(
            f"need {n - 1} flows and consistencies for {n} frames, "
            f"got {len(flows)} and {len(consistencies)}"
        )
    if n == 0:
        return []
    out = [probs[0].astype(np.float32, copy=True)]
    for i in range(1, n):
        warped = warp_backward(out[-1], flows[i - 1])
        s = confidence(probs[i])
        a = s * probs[i] + (1.0 - s) * (consistencies[i - 1] * warped)
        out.append(np.clip(a, 0.0, 1.0).astype(np.float32))
    return out


def make_trimap(seg: np.ndarray, iterations_fraction: float = 0.01) -> np.ndarray:
    """Three-level trimap from a segmentation probability map.

    The map is binarized at 0.5, then dilated and (independently) eroded
    with a 3x3 8-connected element for ``round(fraction * width)``
    iterations; pixels outside the frame count as background. Labels:
    255 inside the eroded region, 0 outside the dilated region, 128 between.
    """
    h, w = seg.shape
    binary = seg >= 0.5
    k = int(round(iterations_fraction * w))
    if k > 0:
        structure = np.ones((3, 3), dtype=bool)
        dilated = binary_dilation(binary, structure=structure, iterations=k, border_value=0)
        eroded = binary_erosion(binary, structure=structure, iterations=k, border_value=0)
    else:
        dilated = binary
        eroded = binary
    trimap = np.full((h, w), TRIMAP_UNKNOWN, dtype=np.uint8)
    trimap[~dilated] = TRIMAP_BACKGROUND
    trimap[eroded] = TRIMAP_FOREGROUND
    return trimap
