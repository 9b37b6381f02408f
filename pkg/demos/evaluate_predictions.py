"""Score alpha-matte predictions against a generated clip.

We render a foreground clip with known motion, treat its own alphas as the
perfect prediction and a noisy copy as a bad one, and compare the loss and
metric reports for the two.
"""

import numpy as np

from mattetools.fakemotion import MotionSpec, pairwise_flow, render_foreground_clip
from mattetools.matteval import compute_losses, temporal_metrics


def main():
    rng = np.random.default_rng(3)
    h = w = 128
    n = 4
    img = rng.random((h, w, 3)).astype(np.float32)
    yy, xx = np.mgrid[0:h, 0:w]
    alpha = (((xx - 64) ** 2 + (yy - 64) ** 2) <= 28**2).astype(np.float32)

    # constant integer per-frame motion keeps the ground-truth flows exact
    total = np.zeros((h, w, 2), np.float32)
    total[..., 0], total[..., 1] = 8.0, -4.0
    clip = render_foreground_clip(
        img, alpha, MotionSpec(clip_length=n), rng,
        total_flow=total, shifts=np.zeros((n, 2), np.float32),
    )

    from_first = [pairwise_flow(clip, 1, i) for i in range(2, n + 1)]
    consecutive = [pairwise_flow(clip, i - 1, i) for i in range(2, n + 1)]
    local_flows = [f for f, _ in consecutive]

    for name, pred in [
        ("perfect", clip.alphas),
        ("noisy", [np.clip(a + rng.normal(0, 0.05, (h, w)), 0, 1).astype(np.float32)
                   for a in clip.alphas]),
    ]:
        losses = compute_losses(pred, clip.alphas, from_first, consecutive)
        metrics = temporal_metrics(pred, clip.alphas, local_flows)
        print(f"{name}:")
        print(f"  L_alpha={losses.l_alpha:.5f}  L_G={losses.l_global:.5f}  "
              f"L_L={losses.l_local:.5f}  total={losses.total:.5f}")
        print(f"  SSDA={metrics.ssda:.2f}  dtSSD={metrics.dtssd:.2f}  "
              f"MESSDdt={metrics.messddt:.2f}")


if __name__ == "__main__":
    main()
