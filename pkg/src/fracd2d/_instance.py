"""Precomputed per-instance tables shared by the exact and MC hop paths.

Nodes are re-indexed by ascending (target degree, id) so that the admissible
contact pool of a source of degree q - all other users with degree <= q - is
a prefix of the sorted arrays.  Sigma tables over every degree prefix are
snapshotted once; Bernoulli tilts for the set sampler are solved once per
distinct degree.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import build_prefix_snapshots, solve_bernoulli_tilt
from .spatial_grid import cells_of


@dataclass
class PreparedInstance:
    n: int
    epsilon: float
    order: np.ndarray          # sorted index -> node id
    sorted_of_id: np.ndarray   # node id -> sorted index
    deg_s: np.ndarray
    w_s: np.ndarray
    logw_s: np.ndarray
    cellx_s: np.ndarray
    celly_s: np.ndarray
    posx_s: np.ndarray
    posy_s: np.ndarray
    uniq_vals: np.ndarray
    prefix_end: np.ndarray
    snap_off: np.ndarray
    snap_flat: np.ndarray
    c_by_deg: np.ndarray
    d_min: float


def prepare_instance(degrees_target, layout, grid, epsilon):
    """Build the sorted-space tables for one frozen (degrees, layout) pair."""
    targets = np.asarray(degrees_target, dtype=np.int64)
    n = targets.size
    if layout.n != n:
        raise ValueError("layout size does not match degree sequence")
    order = np.lexsort((np.arange(n), targets))
    sorted_of_id = np.empty(n, dtype=np.int64)
    sorted_of_id[order] = np.arange(n)
    deg_s = targets[order]
    eps = float(epsilon)
    w_s = deg_s.astype(np.float64) ** (-eps)
    logw_s = -eps * np.log(deg_s.astype(np.float64))

    uniq_vals = np.unique(deg_s)
    prefix_end = np.searchsorted(deg_s, uniq_vals, side="right").astype(np.int64)
    widths = uniq_vals + 1
    snap_off = np.zeros(uniq_vals.size, dtype=np.int64)
    if uniq_vals.size > 1:
        np.cumsum(widths[:-1], out=snap_off[1:])
    snap_flat = np.empty(int(widths.sum()), dtype=np.float64)
    build_prefix_snapshots(logw_s, prefix_end, uniq_vals, snap_off, snap_flat)

    uniq_w = uniq_vals.astype(np.float64) ** (-eps)
    c_by_deg = np.full(uniq_vals.size, math.nan)
    counts = np.diff(np.concatenate(([0], prefix_end))).astype(np.float64)
    for d in range(uniq_vals.size):
        q = int(uniq_vals[d])
        m = int(prefix_end[d]) - 1
        if 0 < q < m:
            cvec = np.zeros(uniq_vals.size)
            cvec[:d + 1] = counts[:d + 1]
            c_by_deg[d] = solve_bernoulli_tilt(uniq_w, cvec, float(q))

    pos = layout.positions[order]
    cellx, celly = cells_of(grid, pos)
    return PreparedInstance(
        n=n, epsilon=eps, order=order, sorted_of_id=sorted_of_id,
        deg_s=deg_s, w_s=w_s, logw_s=logw_s,
        cellx_s=cellx.astype(np.int64), celly_s=celly.astype(np.int64),
        posx_s=pos[:, 0].copy(), posy_s=pos[:, 1].copy(),
        uniq_vals=uniq_vals, prefix_end=prefix_end,
        snap_off=snap_off, snap_flat=snap_flat, c_by_deg=c_by_deg,
        d_min=grid.cell_side / 10.0,
    )
