import numpy as np
import pytest

from mattetools.fakemotion import (
    MotionSpec,
    cumulative_flow,
    exit_return_shift,
    pairwise_flow,
    render_foreground_clip,
    synth_total_flow,
)
from mattetools.imgcore import resize_bilinear, warp_backward


class RecordingRng:
    """Scripted stand-in for numpy's Generator."""

    def __init__(self, normals=0.0, randoms=(), ints=()):
        self.normal_value = normals
        self.normal_sizes = []
        self._randoms = list(randoms)
        self._ints = list(ints)

    def normal(self, loc, scale, size):
        self.normal_sizes.append(size)
        return np.full(size, self.normal_value)

    def random(self):
        return self._randoms.pop(0)

    def integers(self, *a, **k):
        return self._ints.pop(0)


def disk_alpha(h, w, cx, cy, radius):
    yy, xx = np.mgrid[0:h, 0:w]
    return ((xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2).astype(np.float32)


class TestSynthTotalFlow:
    def test_zero_draws_give_zero_field(self):
        flow = synth_total_flow(128, 128, MotionSpec(), RecordingRng(0.0))
        assert flow.shape == (128, 128, 2)
        assert not flow.any()

    def test_grid_sizes_at_520(self):
        rng = RecordingRng(0.0)
        synth_total_flow(520, 520, MotionSpec(), rng)
        assert rng.normal_sizes == [(1, 1, 2), (4, 4, 2), (16, 16, 2)]

    def test_matches_resize_composition(self):
        spec = MotionSpec()
        got = synth_total_flow(256, 192, spec, np.random.default_rng(11))
        rng = np.random.default_rng(11)
        ref = np.zeros((256, 192, 2), np.float32)
        for divisor, sigma in spec.scale_params:
            gh = 256 // divisor if divisor else 1
            gw = 192 // divisor if divisor else 1
            grid = rng.normal(0.0, sigma, size=(gh, gw, 2)).astype(np.float32)
            ref += grid[0, 0] if gh == gw == 1 else resize_bilinear(grid, 256, 192)
        np.testing.assert_allclose(got, ref, atol=1e-4)

    def test_small_frames_rejected(self):
        with pytest.raises(ValueError):
            synth_total_flow(100, 520, MotionSpec(), np.random.default_rng(0))


class TestCumulativeFlow:
    def test_first_frame_zero(self):
        total = np.full((4, 4, 2), 7.0, np.float32)
        assert not cumulative_flow(total, 1, 5).any()

    @pytest.mark.parametrize("i,expected", [(3, 4.0), (5, 8.0)])
    def test_scalar_fractions(self, i, expected):
        total = np.zeros((2, 2, 2), np.float32)
        total[..., 0] = 10.0
        out = cumulative_flow(total, i, 5)
        np.testing.assert_allclose(out[..., 0], expected)
        np.testing.assert_allclose(out[..., 1], 0.0)

    def test_linear_in_index_and_total(self):
        rng = np.random.default_rng(1)
        total = rng.normal(size=(3, 3, 2)).astype(np.float32)
        c2 = cumulative_flow(total, 2, 6)
        c4 = cumulative_flow(total, 4, 6)
        np.testing.assert_allclose(c4, 3 * c2, rtol=1e-6)
        np.testing.assert_allclose(cumulative_flow(2 * total, 4, 6), 2 * c4, rtol=1e-6)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            cumulative_flow(np.zeros((2, 2, 2), np.float32), 0, 5)
        with pytest.raises(ValueError):
            cumulative_flow(np.zeros((2, 2, 2), np.float32), 6, 5)


class TestExitReturnShift:
    def test_left_edge_person_admits_only_left(self):
        alpha = np.zeros((10, 12), np.float32)
        alpha[:, 0] = 1.0  # touches left, top and bottom boundaries
        rng = RecordingRng(randoms=[0.0], ints=[0])
        shifts = exit_return_shift(alpha, 5, rng)
        # only "left" admissible: content moves left = positive-dx flow
        assert shifts[:, 1].max() == 0.0
        assert shifts[2, 0] == pytest.approx(6.0)  # W/2 at peak

    def test_triangular_schedule(self):
        alpha = disk_alpha(16, 16, 8, 8, 3)
        rng = RecordingRng(randoms=[0.0], ints=[0])
        shifts = exit_return_shift(alpha, 5, rng)
        mags = np.hypot(shifts[:, 0], shifts[:, 1])
        m = mags[2]
        np.testing.assert_allclose(mags, [0.0, m / 2, m, m / 2, 0.0], atol=1e-5)
        assert m == 8.0  # half the frame dimension

    def test_gate_probability_skips(self):
        alpha = disk_alpha(16, 16, 8, 8, 3)
        shifts = exit_return_shift(alpha, 5, RecordingRng(randoms=[0.9]))
        assert not shifts.any()

    def test_no_admissible_side_gives_zeros(self):
        alpha = np.ones((8, 8), np.float32)
        shifts = exit_return_shift(alpha, 5, RecordingRng(randoms=[0.0]))
        assert not shifts.any()

    def test_incidence_frequency(self):
        alpha = disk_alpha(16, 16, 8, 8, 3)
        rng = np.random.default_rng(42)
        hits = sum(
            exit_return_shift(alpha, 5, rng).any() for _ in range(30_000)
        )
        assert abs(hits / 30_000 - 1 / 3) < 0.01


class TestRenderForegroundClip:
    def test_zero_motion_gives_identical_copies(self):
        rng = np.random.default_rng(2)
        fg = rng.random((32, 32, 3)).astype(np.float32)
        alpha = disk_alpha(32, 32, 16, 16, 8)
        spec = MotionSpec(clip_length=4)
        clip = render_foreground_clip(
            fg, alpha, spec, rng,
            total_flow=np.zeros((32, 32, 2), np.float32),
            shifts=np.zeros((4, 2), np.float32),
        )
        for f, a in zip(clip.frames, clip.alphas):
            assert np.array_equal(f, fg)
            assert np.array_equal(a, alpha)

    def test_exit_shift_translates_disk(self):
        rng = np.random.default_rng(3)
        w = h = 64
        fg = rng.random((h, w, 3)).astype(np.float32)
        alpha = disk_alpha(h, w, 16, 32, 6)
        n = 5
        shifts = np.zeros((n, 2), np.float32)
        shifts[:, 0] = [-0.0, -16.0, -32.0, -16.0, -0.0]  # content moves right
        clip = render_foreground_clip(
            fg, alpha, MotionSpec(clip_length=n), rng,
            total_flow=np.zeros((h, w, 2), np.float32), shifts=shifts,
        )
        mid = clip.alphas[2]
        ys, xs = np.nonzero(mid > 0.5)
        assert abs(xs.mean() - (16 + 32)) < 1.0

    def test_cumulative_flows_reproduce_frames_bitexactly(self):
        rng = np.random.default_rng(4)
        fg = rng.random((140, 150, 3)).astype(np.float32)
        alpha = disk_alpha(140, 150, 70, 75, 30)
        clip = render_foreground_clip(fg, alpha, MotionSpec(clip_length=4), rng)
        for i in range(4):
            assert np.array_equal(warp_backward(fg, clip.cumulative_flows[i]), clip.frames[i])
            assert np.array_equal(warp_backward(alpha, clip.cumulative_flows[i]), clip.alphas[i])

    def test_alpha_stays_in_unit_interval(self):
        rng = np.random.default_rng(5)
        fg = rng.random((130, 130, 3)).astype(np.float32)
        alpha = disk_alpha(130, 130, 65, 65, 25)
        clip = render_foreground_clip(fg, alpha, MotionSpec(clip_length=6), rng)
        for a in clip.alphas:
            assert a.min() >= 0.0 and a.max() <= 1.0

    def test_same_seed_is_deterministic(self):
        fg = np.random.default_rng(6).random((130, 130, 3)).astype(np.float32)
        alpha = disk_alpha(130, 130, 65, 65, 25)
        c1 = render_foreground_clip(fg, alpha, MotionSpec(4), np.random.default_rng(9))
        c2 = render_foreground_clip(fg, alpha, MotionSpec(4), np.random.default_rng(9))
        for a, b in zip(c1.frames, c2.frames):
            assert np.array_equal(a, b)


class TestPairwiseFlow:
    def _clip(self, total):
        rng = np.random.default_rng(7)
        h, w = total.shape[:2]
        fg = rng.random((h, w, 3)).astype(np.float32)
        alpha = disk_alpha(h, w, w // 2, h // 2, min(h, w) // 4)
        return render_foreground_clip(
            fg, alpha, MotionSpec(clip_length=5), rng,
            total_flow=total, shifts=np.zeros((5, 2), np.float32),
        )

    def test_constant_total_consecutive_is_total_over_n(self):
        total = np.zeros((32, 32, 2), np.float32)
        total[..., 0], total[..., 1] = 10.0, -5.0
        clip = self._clip(total)
        flow, _ = pairwise_flow(clip, 3, 4)
        np.testing.assert_allclose(flow[..., 0], 2.0, atol=1e-5)
        np.testing.assert_allclose(flow[..., 1], -1.0, atol=1e-5)

    def test_from_first_frame_equals_cumulative(self):
        total = np.random.default_rng(8).normal(0, 3, (32, 32, 2)).astype(np.float32)
        clip = self._clip(total)
        flow, _ = pairwise_flow(clip, 1, 4)
        np.testing.assert_array_equal(flow, clip.cumulative_flows[3])

    def test_constant_total_composition_exact_where_valid(self):
        total = np.zeros((32, 32, 2), np.float32)
        total[..., 0], total[..., 1] = 5.0, -10.0  # per-frame (1, -2): integer
        clip = self._clip(total)
        flow, valid = pairwise_flow(clip, 2, 4)
        rewarped = warp_backward(clip.frames[1], flow)
        err = np.abs(rewarped - clip.frames[3]).max(axis=2) * valid
        assert err.max() < 1e-6

    def test_varying_total_beats_zero_flow_baseline(self):
        rng = np.random.default_rng(9)
        grid = rng.normal(0, 6, (4, 4, 2)).astype(np.float32)
        total = resize_bilinear(grid, 32, 32)
        clip = self._clip(total)
        flow, valid = pairwise_flow(clip, 2, 5)
        warped = warp_backward(clip.frames[1], flow)
        mae = (np.abs(warped - clip.frames[4]).mean(axis=2) * valid).mean()
        baseline = (np.abs(clip.frames[1] - clip.frames[4]).mean(axis=2) * valid).mean()
        assert mae < baseline

    def test_bad_order_rejected(self):
        clip = self._clip(np.zeros((32, 32, 2), np.float32))
        with pytest.raises(ValueError):
            pairwise_flow(clip, 3, 3)
