"""Losses and temporal quality metrics for alpha-matte sequences.

Losses operate on [0, 1] alphas and foregrounds. Metrics (SSDA, dtSSD,
MESSDdt) rescale alphas to the 0-255 range first, matching the scale the
published benchmark numbers use. All accumulation is float64.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .imgcore import warp_backward

FOREGROUND_LOSS_WEIGHT = 0.25
METRIC_ALPHA_SCALE = 255.0


@dataclass(frozen=True)
class LossReport:
    l_alpha: float
    l_global: float
    l_local: float
    l_foreground: float

    @property
    def total(self) -> float:
        return self.l_alpha + self.l_global + self.l_local + FOREGROUND_LOSS_WEIGHT * self.l_foreground

    def as_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


@dataclass(frozen=True)
class MetricReport:
    ssda: float
    dtssd: float
    messddt: float

    def as_dict(self) -> dict:
        return asdict(self)


def _check_sequences(pred, gt):
    if len(pred) != len(gt):
        raise ValueError(f"sequence lengths differ: {len(pred)} vs {len(gt)}")
    for p, g in zip(pred, gt):
        if p.shape != g.shape:
            raise ValueError(f"frame shapes differ: {p.shape} vs {g.shape}")


def loss_alpha(pred: list[np.ndarray], gt: list[np.ndarray]) -> float:
    """Mean absolute difference over all frames and pixels."""
    _check_sequences(pred, gt)
    n = len(pred)
    h, w = pred[0].shape
    total = 0.0
    for p, g in zip(pred, gt):
        total += np.abs(p.astype(np.float64) - g.astype(np.float64)).sum()
    return total / (n * h * w)


def _warped_l1(pred_i: np.ndarray, pred_src: np.ndarray, flow: np.ndarray, valid: np.ndarray) -> float:
    warped = warp_backward(pred_src.astype(np.float64), flow)
    return (np.abs(pred_i.astype(np.float64) - warped) * valid.astype(np.float64)).sum()


def loss_global(
    pred: list[np.ndarray], flows_from_first: list[tuple[np.ndarray, np.ndarray]]
) -> float:
    """Temporal loss against the first frame warped to each later frame.

    ``flows_from_first[i-2]`` is the (flow, validity) pair from frame 1 to
    frame i. The denominator is the full pixel count, valid or not.
    """
    n = len(pred)
    if len(flows_from_first) != n - 1:
        raise ValueError(f"need {n - 1} flow pairs, got {len(flows_from_first)}")
    if n < 2:
        return 0.0
    h, w = pred[0].shape
    total = 0.0
    for i in range(2, n + 1):
        flow, valid = flows_from_first[i - 2]
        total += _warped_l1(pred[i - 1], pred[0], flow, valid)
    return total / ((n - 1) * h * w)


def loss_local(
    pred: list[np.ndarray], flows_consecutive: list[tuple[np.ndarray, np.ndarray]]
) -> float:
    """Temporal loss between successive frames; flows run (i-1) -> i."""
    n = len(pred)
    if len(flows_consecutive) != n - 1:
        raise ValueError(f"need {n - 1} flow pairs, got {len(flows_consecutive)}")
    if n < 2:
        return 0.0
    h, w = pred[0].shape
    total = 0.0
    for i in range(2, n + 1):
        flow, valid = flows_consecutive[i - 2]
        total += _warped_l1(pred[i - 1], pred[i - 2], flow, valid)
    return total / ((n - 1) * h * w)


def loss_foreground(
    pred_fg: list[np.ndarray], gt_fg: list[np.ndarray], pred_alpha: list[np.ndarray]
) -> float:
    """Alpha-gated L1 distance between predicted and ground-truth foregrounds."""
    _check_sequences(pred_fg, gt_fg)
    if len(pred_alpha) != len(pred_fg):
        raise ValueError("alpha sequence length does not match foregrounds")
    n = len(pred_fg)
    h, w = pred_alpha[0].shape
    total = 0.0
    for pf, gf, a in zip(pred_fg, gt_fg, pred_alpha):
        diff = np.abs(pf.astype(np.float64) - gf.astype(np.float64)).sum(axis=2)
        total += (a.astype(np.float64) * diff).sum()
    return total / (n * h * w * 3)


def total_loss(report: LossReport) -> float:
    return report.total


def compute_losses(
    pred_alpha: list[np.ndarray],
    gt_alpha: list[np.ndarray],
    flows_from_first: list[tuple[np.ndarray, np.ndarray]],
    flows_consecutive: list[tuple[np.ndarray, np.ndarray]],
    pred_fg: list[np.ndarray] | None = None,
    gt_fg: list[np.ndarray] | None = None,
) -> LossReport:
    """Full loss report; the foreground term is 0 when foregrounds are absent."""
    l_f = 0.0
    if pred_fg is not None and gt_fg is not None:
        l_f = loss_foreground(pred_fg, gt_fg, pred_alpha)
    return LossReport(
        l_alpha=loss_alpha(pred_alpha, gt_alpha),
        l_global=loss_global(pred_alpha, flows_from_first),
        l_local=loss_local(pred_alpha, flows_consecutive),
        l_foreground=l_f,
    )


def temporal_metrics(
    pred: list[np.ndarray], gt: list[np.ndarray], gt_flows: list[np.ndarray]
) -> MetricReport:
    """SSDA, dtSSD and MESSDdt on the 0-255 alpha scale.

    ``gt_flows[i-2]`` carries frame i's pixels back to frame i-1 and is used
    for the motion-compensated MESSDdt term.
    """
    _check_sequences(pred, gt)
    n = len(pred)
    if len(gt_flows) != max(n - 1, 0):
        raise ValueError(f"need {n - 1} flows, got {len(gt_flows)}")
    h, w = pred[0].shape
    p = [x.astype(np.float64) * METRIC_ALPHA_SCALE for x in pred]
    g = [x.astype(np.float64) * METRIC_ALPHA_SCALE for x in gt]

    ssda = float(np.mean([np.sqrt(((pi - gi) ** 2).sum()) for pi, gi in zip(p, g)]))

    if n < 2:
        return MetricReport(ssda=ssda, dtssd=0.0, messddt=0.0)

    dt_terms = []
    me_terms = []
    for i in range(1, n):
        dt = (p[i] - p[i - 1]) - (g[i] - g[i - 1])
        dt_terms.append(np.sqrt((dt**2).sum()))
        pw = warp_backward(p[i - 1], gt_flows[i - 1])
        gw = warp_backward(g[i - 1], gt_flows[i - 1])
        me = np.abs((p[i] - g[i]) ** 2 - (pw - gw) ** 2).sum() / (h * w)
        me_terms.append(me)
    return MetricReport(
        ssda=ssda, dtssd=float(np.mean(dt_terms)), messddt=float(np.mean(me_terms))
    )
