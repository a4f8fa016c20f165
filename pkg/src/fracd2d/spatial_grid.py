"""Uniform node placement, transmission-range grid, and TDMA reuse schedule.

The unit square is tiled by cells of side c1 * r(n) with
r(n) = c_r * sqrt(ln n / n).  Multi-hop routing cost between two users is
the L1 (Manhattan) distance between their cells: the set of cells at cost x
from an interior cell is exactly the 4x-cell diamond ring, matching the
equidistant-square picture the capacity analysis rests on.  Cells that may
transmit simultaneously are those congruent modulo the reuse spacing T on
both axes, with T >= (2 + delta) / c1.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._rng import numpy_rng
from .errors import ParameterError

_PLACEMENT_STREAM = 0x706F5E5


@dataclass(frozen=True)
class SpatialLayout:
    """Node positions in [0,1)^2, row i = (x_i, y_i)."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ParameterError("positions must be an (n, 2) array")
        if pos.shape[0] < 1:
            raise ParameterError("need at least one node")
        if np.any(pos < 0.0) or np.any(pos >= 1.0):
            raise ParameterError("positions must lie in [0, 1)^2")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self):
        return self.positions.shape[0]


@dataclass(frozen=True)
class GridConfig:
    n: int
    c_r: float
    c1: float
    delta: float
    r_n: float
    cell_side: float
    t_spacing: int
    cells_per_side: int


def place_nodes(n, seed):
    """n i.i.d. uniform points in the unit square; deterministic per seed."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = numpy_rng(seed, _PLACEMENT_STREAM)
    return SpatialLayout(rng.random((n, 2)))


def grid_config(n, c_r=1.0, c1=1.0, delta=1.0):
    """Transmission range, cell side, reuse spacing, and grid resolution.

    Defaults c_r = c1 = delta = 1 give the minimal reuse spacing T = 3.
    """
    if n < 2:
        raise ParameterError("n must be >= 2 (ln n must be positive)")
    if c_r <= 0 or c1 <= 0:
        raise ParameterError("c_r and c1 must be positive")
    if delta < 0:
        raise ParameterError("delta must be >= 0")
    r_n = c_r * math.sqrt(math.log(n) / n)
    cell_side = c1 * r_n
    t_spacing = math.ceil((2.0 + delta) / c1)
    cells_per_side = max(1, math.ceil(1.0 / cell_side))
    return GridConfig(n=n, c_r=c_r, c1=c1, delta=delta, r_n=r_n,
                      cell_side=cell_side, t_spacing=t_spacing,
                      cells_per_side=cells_per_side)


def cell_of(grid, point):
    """Cell (cx, cy) containing a point of the unit square."""
    x, y = float(point[0]), float(point[1])
    if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
        raise ParameterError("point must lie in [0, 1)^2")
    cx = min(int(x / grid.cell_side), grid.cells_per_side - 1)
    cy = min(int(y / grid.cell_side), grid.cells_per_side - 1)
    return cx, cy


def cells_of(grid, positions):
    """Vectorized cell_of over an (n, 2) position array."""
    idx = np.minimum((positions / grid.cell_side).astype(np.int64),
                     grid.cells_per_side - 1)
    return idx[:, 0], idx[:, 1]


def hop_count(grid, src, dst):
    """Multi-hop routing cost = L1 distance between the two cells."""
    sx, sy = cell_of(grid, src)
    dx, dy = cell_of(grid, dst)
    return abs(sx - dx) + abs(sy - dy)


def ring_cells(grid, src_cell, x):
    """All in-bounds cells at L1 distance exactly x from src_cell."""
    if x < 1:
        raise ParameterError("x must be >= 1")
    cx, cy = src_cell
    m = grid.cells_per_side
    out = []
    for dx in range(-x, x + 1):
        rem = x - abs(dx)
        for dy in ((rem, -rem) if rem > 0 else (0,)):
            px, py = cx + dx, cy + dy
            if 0 <= px < m and 0 <= py < m:
                out.append((px, py))
    return out


def concurrent_cells(grid):
    """Partition of all cells into T^2 interference-free slots.

    Slot (a, b) holds the cells (i, j) with i = a, j = b (mod T); within a
    slot any two distinct cells are >= T apart on at least each differing
    axis, so they are never interference units of each other.
    """
    m = grid.cells_per_side
    t = grid.t_spacing
    slots = []
    for a in range(min(t, m)):
        for b in range(min(t, m)):
            slot = [(i, j) for i in range(a, m, t) for j in range(b, m, t)]
            slots.append(slot)
    return slots


def layout_to_csv(layout, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,x,y\n")
        for i, (x, y) in enumerate(layout.positions):
            fh.write(f"{i},{x:.17g},{y:.17g}\n")


def layout_from_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(data[:, 0])
    return SpatialLayout(data[order, 1:3])
