"""Computational domains, fields over them, and quadrature.

The mesh is a 1D interval partition or a structured triangulation of a 2D
rectangle (each lattice quad split along its lower-left to upper-right
diagonal).  Trial functions are piecewise linear on nodes, so gradients are
constant per cell; coefficients such as densities live on cells.  Integrals
of nodal data use lumped (node-weighted) quadrature, integrals of gradient
data use exact cell quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FieldMismatchError, ParameterError


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable simplicial mesh of an interval or an axis-aligned rectangle.

    All derived arrays (gradient coefficients, lumped node weights, interior
    index maps, stiffness assembly scaffolding) are precomputed once and
    frozen, so instances are safe to share across threads.
    """

    dimension: int
    node_coords: np.ndarray      # (n_nodes, dimension)
    cell_nodes: np.ndarray       # (n_cells, dimension + 1), int
    cell_measures: np.ndarray    # (n_cells,)
    boundary_mask: np.ndarray    # (n_nodes,), bool

    # Derived in __post_init__.
    node_weights: np.ndarray = field(init=False, repr=False, compare=False)
    cell_centroids: np.ndarray = field(init=False, repr=False, compare=False)
    grad_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    interior_idx: np.ndarray = field(init=False, repr=False, compare=False)
    _stiff_base: np.ndarray = field(init=False, repr=False, compare=False)
    _asm_rows: np.ndarray = field(init=False, repr=False, compare=False)
    _asm_cols: np.ndarray = field(init=False, repr=False, compare=False)
    _asm_sel: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ParameterError(f"dimension must be 1 or 2, got {self.dimension}")
        coords = np.array(self.node_coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != self.dimension:
            raise ParameterError("node_coords must have shape (n_nodes, dimension)")
        cells = np.array(self.cell_nodes, dtype=np.int64)
        k = self.dimension + 1
        if cells.ndim != 2 or cells.shape[1] != k:
            raise ParameterError(f"each cell must reference {k} nodes")
        measures = np.array(self.cell_measures, dtype=float)
        bmask = np.array(self.boundary_mask, dtype=bool)
        n_nodes = coords.shape[0]
        if bmask.shape != (n_nodes,):
            raise ParameterError("boundary_mask must have one flag per node")
        if cells.min(initial=0) < 0 or cells.max(initial=-1) >= n_nodes:
            raise ParameterError("cell_nodes reference nodes outside the grid")
        if measures.shape != (cells.shape[0],):
            raise ParameterError("cell_measures must have one entry per cell")
        if np.any(measures <= 0.0):
            raise ParameterError("every cell measure must be positive")
        n_interior = int(np.count_nonzero(~bmask))
        if n_interior < 1:
            raise ParameterError("grid must have at least one interior node")

        if self.dimension == 1:
            x = coords[:, 0]
            if np.any(np.diff(x) <= 0.0):
                raise ParameterError("1D node coordinates must be strictly increasing")
            if not (bmask[0] and bmask[-1]):
                raise ParameterError("1D endpoints must be flagged as boundary nodes")
            lengths = x[cells[:, 1]] - x[cells[:, 0]]
            if np.any(lengths <= 0.0) or not np.allclose(lengths, measures):
                raise ParameterError("1D cell measures inconsistent with node coordinates")
            grad = np.empty((cells.shape[0], 2, 1))
            grad[:, 0, 0] = -1.0 / lengths
            grad[:, 1, 0] = 1.0 / lengths
        else:
            p0 = coords[cells[:, 0]]
            e1 = coords[cells[:, 1]] - p0
            e2 = coords[cells[:, 2]] - p0
            det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
            if np.any(det <= 0.0):
                raise ParameterError("2D cells must be positively oriented triangles")
            if not np.allclose(0.5 * det, measures):
                raise ParameterError("2D cell measures inconsistent with node coordinates")
            edge_mats = np.stack((e1, e2), axis=2)           # columns are e1, e2
            inv = np.linalg.inv(edge_mats)
            g1 = inv[:, 0, :]
            g2 = inv[:, 1, :]
            grad = np.stack((-(g1 + g2), g1, g2), axis=1)    # (n_cells, 3, 2)

        weights = np.zeros(n_nodes)
        np.add.at(weights, cells.ravel(), np.repeat(measures / k, k))
        centroids = coords[cells].mean(axis=1)
        interior_idx = np.flatnonzero(~bmask)
        node_to_interior = np.full(n_nodes, -1, dtype=np.int64)
        node_to_interior[interior_idx] = np.arange(interior_idx.size)

        # Scaffolding for weighted-stiffness assembly restricted to interior dofs.
        stiff_base = measures[:, None, None] * np.einsum("cmd,cnd->cmn", grad, grad)
        rows = np.broadcast_to(cells[:, :, None], (cells.shape[0], k, k)).ravel()
        cols = np.broadcast_to(cells[:, None, :], (cells.shape[0], k, k)).ravel()
        sel = (~bmask[rows]) & (~bmask[cols])

        for name, value in (
            ("node_coords", coords),
            ("cell_nodes", cells),
            ("cell_measures", measures),
            ("boundary_mask", bmask),
            ("node_weights", weights),
            ("cell_centroids", centroids),
            ("grad_coeffs", grad),
            ("interior_idx", interior_idx),
            ("_stiff_base", stiff_base),
            ("_asm_rows", node_to_interior[rows[sel]]),
            ("_asm_cols", node_to_interior[cols[sel]]),
            ("_asm_sel", sel),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_nodes(self) -> int:
        return self.node_coords.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cell_nodes.shape[0]

    @property
    def nodes_per_cell(self) -> int:
        return self.dimension + 1

    @property
    def n_interior(self) -> int:
        return self.interior_idx.size

    @property
    def total_measure(self) -> float:
        return float(self.cell_measures.sum())


@dataclass(frozen=True, eq=False)
class NodalField:
    """One real value per node, optionally with homogeneous Dirichlet data.

    Dirichlet-flagged fields have their boundary entries forced to exactly
    zero on construction.
    """

    grid: Grid
    values: np.ndarray
    dirichlet: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape != (self.grid.n_nodes,):
            raise FieldMismatchError(
                f"nodal field has {vals.size} values, grid has {self.grid.n_nodes} nodes"
            )
        if self.dirichlet:
            vals[self.grid.boundary_mask] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class CellField:
    """One real value per cell (densities, gradient magnitudes)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape != (self.grid.n_cells,):
            raise FieldMismatchError(
                f"cell field has {vals.size} values, grid has {self.grid.n_cells} cells"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def interval_grid(a: float, b: float, n_cells: int) -> Grid:
    """Uniform partition of the interval (a, b) into ``n_cells`` segments."""
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ParameterError("interval endpoints must be finite with b > a")
    if n_cells < 2:
        raise ParameterError("need at least 2 cells for one interior node")
    return interval_grid_from_nodes(np.linspace(a, b, n_cells + 1))


def interval_grid_from_nodes(nodes: np.ndarray) -> Grid:
    """1D grid from explicit, strictly increasing node coordinates."""
    x = np.asarray(nodes, dtype=float).reshape(-1)
    if x.size < 3:
        raise ParameterError("need at least 3 nodes for one interior node")
    n_cells = x.size - 1
    cells = np.column_stack((np.arange(n_cells), np.arange(1, n_cells + 1)))
    bmask = np.zeros(x.size, dtype=bool)
    bmask[0] = bmask[-1] = True
    return Grid(
        dimension=1,
        node_coords=x[:, None],
        cell_nodes=cells,
        cell_measures=np.diff(x),
        boundary_mask=bmask,
    )


def rectangle_grid(lx: float, ly: float, nx: int, ny: int) -> Grid:
    """Structured triangulation of (0, lx) x (0, ly) on an nx-by-ny node lattice."""
    if lx <= 0.0 or ly <= 0.0:
        raise ParameterError("rectangle extents must be positive")
    if nx < 3 or ny < 3:
        raise ParameterError("need at least a 3x3 node lattice for interior nodes")
    xs = np.linspace(0.0, lx, nx)
    ys = np.linspace(0.0, ly, ny)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    coords = np.column_stack((X.ravel(), Y.ravel()))   # node k = j * nx + i

    i = np.arange(nx - 1)
    j = np.arange(ny - 1)
    J, I = np.meshgrid(j, i, indexing="ij")
    k00 = (J * nx + I).ravel()
    lower = np.column_stack((k00, k00 + 1, k00 + nx + 1))
    upper = np.column_stack((k00, k00 + nx + 1, k00 + nx))
    cells = np.empty((2 * k00.size, 3), dtype=np.int64)
    cells[0::2] = lower
    cells[1::2] = upper

    hx = lx / (nx - 1)
    hy = ly / (ny - 1)
    measures = np.full(cells.shape[0], 0.5 * hx * hy)

    ii = np.arange(nx * ny) % nx
    jj = np.arange(nx * ny) // nx
    bmask = (ii == 0) | (ii == nx - 1) | (jj == 0) | (jj == ny - 1)
    return Grid(
        dimension=2,
        node_coords=coords,
        cell_nodes=cells,
        cell_measures=measures,
        boundary_mask=bmask,
    )


def nodal_field_from_callable(grid: Grid, fn: Callable, dirichlet: bool = False) -> NodalField:
    """Sample ``fn`` at node coordinates; fn(x) in 1D, fn(x, y) in 2D."""
    c = grid.node_coords
    vals = fn(c[:, 0]) if grid.dimension == 1 else fn(c[:, 0], c[:, 1])
    return NodalField(grid, np.broadcast_to(np.asarray(vals, dtype=float), (grid.n_nodes,)), dirichlet)


def cell_field_from_callable(grid: Grid, fn: Callable) -> CellField:
    """Sample ``fn`` at cell centroids; fn(x) in 1D, fn(x, y) in 2D."""
    c = grid.cell_centroids
    vals = fn(c[:, 0]) if grid.dimension == 1 else fn(c[:, 0], c[:, 1])
    return CellField(grid, np.broadcast_to(np.asarray(vals, dtype=float), (grid.n_cells,)))


def constant_nodal_field(grid: Grid, value: float, dirichlet: bool = False) -> NodalField:
    return NodalField(grid, np.full(grid.n_nodes, float(value)), dirichlet)


def constant_cell_field(grid: Grid, value: float) -> CellField:
    return CellField(grid, np.full(grid.n_cells, float(value)))


def _nodal_values(grid: Grid, f) -> np.ndarray:
    if isinstance(f, NodalField):
        if f.grid is not grid:
            raise FieldMismatchError("field does not belong to this grid")
        return f.values
    vals = np.asarray(f, dtype=float).reshape(-1)
    if vals.shape != (grid.n_nodes,):
        raise FieldMismatchError(
            f"integrand has {vals.size} values, grid has {grid.n_nodes} nodes"
        )
    return vals


def integrate_nodal(grid: Grid, f) -> float:
    """Lumped-quadrature integral of node-wise data.

    ``f`` is a NodalField on ``grid`` or an array of node values (typically a
    node-wise function of one or more fields).  The weight of node i is the
    sum of adjacent cell measures divided by nodes per cell, so constants
    integrate to the exact domain measure.
    """
    return float(np.dot(grid.node_weights, _nodal_values(grid, f)))


def cell_gradient(grid: Grid, u: NodalField) -> tuple[np.ndarray, CellField]:
    """Exact gradient of the piecewise-linear interpolant of ``u``, per cell.

    Returns the (n_cells, dimension) array of gradient vectors and a
    CellField of their Euclidean magnitudes.
    """
    if not isinstance(u, NodalField) or u.grid is not grid:
        raise FieldMismatchError("u must be a NodalField on this grid")
    grads, mags = _cell_gradient_raw(grid, u.values)
    return grads, CellField(grid, mags)


def _cell_gradient_raw(grid: Grid, u_vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    grads = np.einsum("cmd,cm->cd", grid.grad_coeffs, u_vals[grid.cell_nodes])
    mags = np.sqrt(np.einsum("cd,cd->c", grads, grads))
    return grads, mags
