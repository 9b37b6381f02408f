"""Temporally smooth a flickering segmentation and cut a trimap from it.

A bright square moves right while the fake segmenter outputs a confident
map only on the first frame and a useless all-0.5 map afterwards. The
smoothing recurrence carries the confident answer forward along the motion,
and the trimap generator turns the result into the usual 3-level map.
"""

import numpy as np

from mattetools.probsmooth import make_trimap, smooth_sequence


def main():
    h = w = 64
    n = 5
    step = 3

    probs = [np.full((h, w), 0.5, np.float32) for _ in range(n)]
    probs[0] = np.zeros((h, w), np.float32)
    probs[0][24:40, 8:24] = 1.0  # the segmenter is only sure once

    # ground-truth motion: content shifts right by `step` each frame, so the
    # backward-sampling flow is a constant (-step, 0)
    flow = np.zeros((h, w, 2), np.float32)
    flow[..., 0] = -step
    flows = [flow] * (n - 1)
    consistencies = [np.ones((h, w), np.float32)] * (n - 1)

    smoothed = smooth_sequence(probs, flows, consistencies)
    for i, a in enumerate(smoothed):
        cols = np.nonzero(a[32] > 0.5)[0]
        span = f"{cols.min()}..{cols.max()}" if cols.size else "none"
        print(f"frame {i + 1}: confident columns {span}")

    trimap = make_trimap(smoothed[-1])
    labels, counts = np.unique(trimap, return_counts=True)
    print("last-frame trimap label counts:", dict(zip(labels.tolist(), counts.tolist())))


if __name__ == "__main__":
    main()
