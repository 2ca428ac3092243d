"""Discrete geometry of the periodic necklace graph.

A cell of length 2*pi consists of a straight link of length pi followed by a
pair of parallel semicircle edges, each of length pi.  Three storage modes are
supported:

* ``full``      -- all three edges stored, vertex values shared.
* ``symmetric`` -- the two semicircles are identified (u_+ == u_-); only one
  is stored and its quadrature/conductance weight is doubled.
* ``line``      -- a plain periodic line, no vertices (homogeneous medium).

Each edge is divided into ``m`` subintervals of length h = pi/m.  The degrees
of freedom are the grid points, with vertex points stored once and shared by
all incident edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODES = ("full", "symmetric", "line")

CELL_LENGTH = 2.0 * np.pi
EDGE_LENGTH = np.pi


def _cell_layout(m: int, mode: str):
    """Per-cell layout: local coordinates and segment list.

    Returns (per_cell, x_cell, segments) where segments is a list of
    (i, j, edge_weight) with local indices; j == per_cell denotes the wrap
    to local index 0 of the next cell.
    """
    h = EDGE_LENGTH / m
    if mode == "line":
        per_cell = 2 * m
        x_cell = h * np.arange(per_cell)
        segs = [(i, i + 1, 1.0) for i in range(per_cell)]
        return per_cell, x_cell, segs

    if mode == "symmetric":
        # [v0, link interior, v_pi, circle interior]
        per_cell = 2 * m
        x_cell = np.empty(per_cell)
        x_cell[: m + 1] = h * np.arange(m + 1)          # v0 .. v_pi
        x_cell[m + 1 :] = EDGE_LENGTH + h * np.arange(1, m)
        segs = [(i, i + 1, 1.0) for i in range(m)]      # link
        circle = [m, *range(m + 1, 2 * m), 2 * m]       # v_pi .. wrap
        segs += [(circle[i], circle[i + 1], 2.0) for i in range(m)]
        return per_cell, x_cell, segs

    if mode == "full":
        # [v0, link interior, v_pi, plus interior, minus interior]
        per_cell = 3 * m - 1
        x_cell = np.empty(per_cell)
        x_cell[: m + 1] = h * np.arange(m + 1)
        x_cell[m + 1 : 2 * m] = EDGE_LENGTH + h * np.arange(1, m)
        x_cell[2 * m :] = EDGE_LENGTH + h * np.arange(1, m)
        segs = [(i, i + 1, 1.0) for i in range(m)]      # link
        plus = [m, *range(m + 1, 2 * m), 3 * m - 1]
        minus = [m, *range(2 * m, 3 * m - 1), 3 * m - 1]
        segs += [(plus[i], plus[i + 1], 1.0) for i in range(m)]
        segs += [(minus[i], minus[i + 1], 1.0) for i in range(m)]
        return per_cell, x_cell, segs

    raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")


@dataclass(frozen=True)
class NecklaceLattice:
    """Periodic lattice of ``n_cells`` cells with ``m`` subintervals per edge."""

    n_cells: int
    m: int
    mode: str
    h: float
    per_cell: int
    x_cell: np.ndarray          # (per_cell,) cell-local coordinates
    weights: np.ndarray         # (n_dof,) lumped quadrature weights
    seg_i: np.ndarray           # segment endpoint indices (global)
    seg_j: np.ndarray
    seg_w: np.ndarray           # per-segment edge weight (2.0 on the folded circle)

    @property
    def n_dof(self) -> int:
        return self.n_cells * self.per_cell

    @property
    def length(self) -> float:
        """Total metric length represented by the quadrature weights."""
        return float(self.weights.sum())

    def node_index(self, cell: int, local: int) -> int:
        return (cell % self.n_cells) * self.per_cell + local

    def coordinates(self) -> np.ndarray:
        """Global coordinate 2*pi*n + x_cell of every DOF (edges overlap in x)."""
        offsets = CELL_LENGTH * np.arange(self.n_cells)
        return (offsets[:, None] + self.x_cell[None, :]).ravel()

    def zero_field(self, dtype=float) -> "GraphField":
        return GraphField(self, np.zeros(self.n_dof, dtype=dtype))

    def field(self, values: np.ndarray) -> "GraphField":
        return GraphField(self, np.asarray(values))


def build_lattice(n_cells: int, m: int, mode: str = "full") -> NecklaceLattice:
    """Build a periodically closed necklace lattice.

    ``n_cells >= 2`` is required so that the periodic wrap never couples a
    vertex to itself twice; ``m >= 2`` keeps at least one interior point per
    edge.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    if n_cells < 2:
        raise ValueError("n_cells must be >= 2 for a periodic closure")
    if m < 2:
        raise ValueError("m must be >= 2")

    per_cell, x_cell, segs = _cell_layout(m, mode)
    n_dof = n_cells * per_cell
    h = EDGE_LENGTH / m

    si, sj, sw = [], [], []
    for n in range(n_cells):
        base = n * per_cell
        for i, j, w in segs:
            gi = base + i
            gj = (base + j) % n_dof      # j == per_cell wraps to the next cell
            si.append(gi)
            sj.append(gj)
            sw.append(w)
    seg_i = np.array(si, dtype=np.intp)
    seg_j = np.array(sj, dtype=np.intp)
    seg_w = np.array(sw)

    weights = np.zeros(n_dof)
    np.add.at(weights, seg_i, seg_w * h / 2.0)
    np.add.at(weights, seg_j, seg_w * h / 2.0)

    return NecklaceLattice(
        n_cells=n_cells,
        m=m,
        mode=mode,
        h=h,
        per_cell=per_cell,
        x_cell=x_cell,
        weights=weights,
        seg_i=seg_i,
        seg_j=seg_j,
        seg_w=seg_w,
    )


@dataclass
class GraphField:
    """Values of a function on all lattice points (real or complex)."""

    lattice: NecklaceLattice
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.lattice.n_dof,):
            raise ValueError(
                f"field has {self.values.shape} values, lattice has "
                f"{self.lattice.n_dof} DOFs"
            )

    def copy(self) -> "GraphField":
        return GraphField(self.lattice, self.values.copy())

    def by_cell(self) -> np.ndarray:
        """View of the values as an (n_cells, per_cell) array."""
        return self.values.reshape(self.lattice.n_cells, self.lattice.per_cell)


def require_same_lattice(u: GraphField, v: GraphField) -> NecklaceLattice:
    if u.lattice is not v.lattice and (
        u.lattice.n_cells != v.lattice.n_cells
        or u.lattice.m != v.lattice.m
        or u.lattice.mode != v.lattice.mode
    ):
        raise ValueError("fields live on different lattices")
    return u.lattice
