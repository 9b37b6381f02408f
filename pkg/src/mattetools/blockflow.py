"""Block-matching motion estimation and forward/backward consistency maps.

The estimator partitions the target frame into square tiles (edge tiles
truncated) and, for each tile, exhaustively searches integer displacements
within a square window for the minimum sum of absolute luma differences
against the reference frame. The winning vector is assigned to every pixel
of the tile. Flows use the backward-sampling convention: a vector ``v`` at a
target pixel means ``target(x) ~= reference(x + v)``.

Consistency maps score forward/backward agreement: the backward flow is
warped to the forward flow's frame, the residual is the SUM of the two
fields (both are stored in sampling convention, so consistent motion makes
them opposite), and ``C = exp(-|residual| / 100)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .imgcore import luma, warp_backward

CONSISTENCY_DECAY = 100.0


@dataclass(frozen=True)
class BlockMEParams:
    block_size: int = 16
    search_radius: int = 16

    def __post_init__(self):
        if self.block_size < 4:
            raise ValueError("block_size must be >= 4")
        if self.search_radius < 1:
            raise ValueError("search_radius must be >= 1")


@njit(cache=True)
def _match_blocks(tgt, refp, bs, r):
    """SAD search per tile. ``refp`` is the reference padded by ``r`` with
    edge replication, so candidate reads need no bounds checks.

    Ties resolve to the smaller squared vector length, then to scan order
    (dy, then dx, ascending). Candidate (0, 0) is evaluated first purely to
    seed the early-exit bound; it cannot change the tie outcome because no
    other candidate shares its zero length.
    """
    h, w = tgt.shape
    nby = (h + bs - 1) // bs
    nbx = (w + bs - 1) // bs
    vx = np.zeros((nby, nbx), dtype=np.float32)
    vy = np.zeros((nby, nbx), dtype=np.float32)
    for by in range(nby):
        y0 = by * bs
        y1 = min(y0 + bs, h)
        for bx in range(nbx):
            x0 = bx * bs
            x1 = min(x0 + bs, w)
            best_cost = 0.0
            for y in range(y0, y1):
                for x in range(x0, x1):
                    best_cost += abs(tgt[y, x] - refp[y + r, x + r])
            best_dx = 0
            best_dy = 0
            best_norm = 0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    if dx == 0 and dy == 0:
                        continue
                    cost = 0.0
                    for y in range(y0, y1):
                        yy = y + dy + r
                        xx = x0 + dx + r
                        for x in range(x0, x1):
                            cost += abs(tgt[y, x] - refp[yy, xx])
                            xx += 1
                        if cost > best_cost:
                            break
                    if cost > best_cost:
                        continue
                    norm = dx * dx + dy * dy
                    if cost < best_cost or norm < best_norm:
                        best_cost = cost
                        best_dx = dx
                        best_dy = dy
                        best_norm = norm
            vx[by, bx] = best_dx
            vy[by, bx] = best_dy
    return vx, vy


def estimate_flow(
    target: np.ndarray, reference: np.ndarray, params: BlockMEParams = BlockMEParams()
) -> np.ndarray:
    """Dense integer flow from ``target`` into ``reference`` by block matching."""
    if target.shape != reference.shape:
        raise ValueError(f"target shape {target.shape} != reference shape {reference.shape}")
    h, w = target.shape[:2]
    if h < params.block_size or w < params.block_size:
        raise ValueError("frame dimensions must be >= block_size")
    tgt = luma(target) if target.ndim == 3 else target.astype(np.float32)
    ref = luma(reference) if reference.ndim == 3 else reference.astype(np.float32)
    r = params.search_radius
    refp = np.pad(ref, r, mode="edge")
    vx, vy = _match_blocks(tgt, refp, params.block_size, r)
    flow = np.empty((h, w, 2), dtype=np.float32)
    flow[..., 0] = np.kron(vx, np.ones((params.block_size, params.block_size), np.float32))[:h, :w]
    flow[..., 1] = np.kron(vy, np.ones((params.block_size, params.block_size), np.float32))[:h, :w]
    return flow


def consistency_map(forward: np.ndarray, backward_prev: np.ndarray) -> np.ndarray:
    """Per-pixel agreement score in (0, 1] between a forward flow on frame i
    and the backward flow on frame i-1.
    """
    if forward.shape != backward_prev.shape:
        raise ValueError(f"flow shapes differ: {forward.shape} vs {backward_prev.shape}")
    warped_back = warp_backward(backward_prev, forward)
    residual = forward + warped_back
    l2 = np.hypot(residual[..., 0], residual[..., 1])
    return np.exp(-l2 / CONSISTENCY_DECAY).astype(np.float32)


def flow_pyramid_for_video(
    frames: list[np.ndarray], params: BlockMEParams = BlockMEParams()
) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Forward flows F_i (i=2..N), backward flows B_i (i=1..N-1) and
    consistency maps C_i (i=2..N) for a frame sequence.
    """
    n = len(frames)
    if n < 2:
        raise ValueError("need at least two frames")
    fwd = [estimate_flow(frames[i], frames[i - 1], params) for i in range(1, n)]
    bwd = [estimate_flow(frames[i], frames[i + 1], params) for i in range(n - 1)]
    cons = [consistency_map(fwd[i], bwd[i]) for i in range(n - 1)]
    return fwd, bwd, cons
