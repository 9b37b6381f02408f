import numpy as np
import pytest
import torch


class BrightnessSegmenter(torch.nn.Module):
    """Deterministic stand-in for a pretrained segmentation network.

    Produces 21 class channels; the person channel's logit grows with pixel
    brightness, every other channel is flat, so bright regions map to high
    person probability. No learned weights, no randomness.
    """

    def __init__(self, person_class=15, n_classes=21, gain=8.0):
        super().__init__()
        self.person_class = person_class
        self.n_classes = n_classes
        self.gain = gain

    def forward(self, x):
        b, _, h, w = x.shape
        brightness = x.mean(dim=1, keepdim=True)
        logits = torch.zeros(b, self.n_classes, h, w, dtype=x.dtype)
        logits[:, self.person_class : self.person_class + 1] = self.gain * brightness
        return {"out": logits}


@pytest.fixture
def stub_model():
    return BrightnessSegmenter()


@pytest.fixture
def frames_dir(tmp_path):
    """Ten frames with a bright moving square on a dark background."""
    import cv2

    d = tmp_path / "frames"
    d.mkdir()
    rng = np.random.default_rng(0)
    h, w = 96, 128
    for i in range(10):
        frame = rng.uniform(0.0, 0.15, (h, w, 3))
        frame[30:60, 10 + 4 * i : 40 + 4 * i] = rng.uniform(0.85, 1.0, (30, 30, 3))
        u8 = (frame * 255).astype(np.uint8)
        cv2.imwrite(str(d / f"frame_{i + 1:04d}.png"), cv2.cvtColor(u8, cv2.COLOR_RGB2BGR))
    return d
