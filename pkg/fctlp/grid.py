"""Cell-centered grids, fields and ghost-cell boundary handling.

The numerical core works on a face list (:class:`FaceTopology`): every
interface knows the extended-array indices of the states on both sides, the
interior cells it feeds and the inverse cell widths along its axis. 1D and 2D
grids only differ in how that list is built.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from fctlp.schemas import BoundarySpec, BoundarySpec2D

logger = logging.getLogger(__name__)

__all__ = [
    "Grid1D",
    "Grid2D",
    "Field",
    "FaceTopology",
    "build_uniform_grid",
    "build_grid",
    "ghost_extend",
    "ghost_extend_2d",
    "face_topology",
]


# ============= Grids =============

@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    cell_centers: np.ndarray
    cell_sizes: np.ndarray
    interface_positions: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.cell_centers) <= 0):
            raise ValueError("cell centers must be strictly increasing")
        if np.any(self.cell_sizes <= 0):
            raise ValueError("cell sizes must be positive")
        for arr in (self.cell_centers, self.cell_sizes, self.interface_positions):
            arr.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return len(self.cell_centers)


@dataclass(frozen=True)
class Grid2D:
    x: Grid1D
    y: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        """(N2, N1): values reshape to rows of constant second coordinate"""
        return self.y.n_cells, self.x.n_cells

    @property
    def n_cells(self) -> int:
        return self.x.n_cells * self.y.n_cells

    def index(self, i: int, j: int) -> int:
        """1-based linear index r = i + (j - 1) N1"""
        n1, n2 = self.x.n_cells, self.y.n_cells
        if not (1 <= i <= n1 and 1 <= j <= n2):
            raise IndexError(f"cell ({i}, {j}) outside {n1}x{n2} grid")
        return i + (j - 1) * n1

    def unravel(self, r: int) -> tuple[int, int]:
        n1 = self.x.n_cells
        if not (1 <= r <= self.n_cells):
            raise IndexError(f"linear index {r} outside 1..{self.n_cells}")
        return (r - 1) % n1 + 1, (r - 1) // n1 + 1

    def cell_areas(self) -> np.ndarray:
        return np.outer(self.y.cell_sizes, self.x.cell_sizes).ravel()

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened cell-center coordinates in linear index order"""
        xx, yy = np.meshgrid(self.x.cell_centers, self.y.cell_centers)
        return xx.ravel(), yy.ravel()


@dataclass
class Field:
    values: np.ndarray
    time_level: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")


def build_uniform_grid(a: float, b: float, n_cells: int) -> Grid1D:
    """Uniform partition of [a, b] with centers offset half a cell from the ends"""
    if n_cells < 3:
        raise ValueError(f"need at least 3 cells, got {n_cells}")
    if not b > a:
        raise ValueError(f"need b > a, got a={a}, b={b}")
    h = (b - a) / n_cells
    centers = a + (np.arange(n_cells) + 0.5) * h
    sizes = np.full(n_cells, h)
    faces = a + np.arange(n_cells + 1) * h
    faces[-1] = b
    return Grid1D(float(a), float(b), centers, sizes, faces)


def build_grid(centers, a: float, b: float) -> Grid1D:
    """Nonuniform grid from cell centers: dx_i is the average of neighbor spacings"""
    x = np.asarray(centers, dtype=float)
    if len(x) < 3:
        raise ValueError(f"need at least 3 cells, got {len(x)}")
    if not (a < x[0] and x[-1] < b):
        raise ValueError("centers must lie strictly inside (a, b)")
    faces = np.concatenate(([a], 0.5 * (x[1:] + x[:-1]), [b]))
    return Grid1D(float(a), float(b), x, np.diff(faces), faces)


# ============= Ghost Cells =============

def _pad_axis(values: np.ndarray, bc: BoundarySpec, width: int, axis: int) -> np.ndarray:
    if bc.kind == "periodic":
        return np.pad(values, _pad_width(values.ndim, axis, width), mode="wrap")
    if bc.kind == "extend_constant":
        return np.pad(values, _pad_width(values.ndim, axis, width), mode="edge")
    return np.pad(values, _pad_width(values.ndim, axis, width), mode="constant",
                  constant_values=(bc.left, bc.right))


def _pad_width(ndim: int, axis: int, width: int) -> list[tuple[int, int]]:
    pads = [(0, 0)] * ndim
    pads[axis] = (width, width)
    return pads


def ghost_extend(values: Union[Field, np.ndarray], bc: BoundarySpec, width: int = 2) -> np.ndarray:
    """Pad a 1D field with `width` ghost cells on each side"""
    if width not in (1, 2):
        raise ValueError(f"ghost width must be 1 or 2, got {width}")
    arr = values.values if isinstance(values, Field) else np.asarray(values, dtype=float)
    if bc.kind == "periodic" and len(arr) < width:
        raise ValueError("periodic extension needs at least `width` cells")
    return _pad_axis(arr, bc, width, axis=0)


def ghost_extend_2d(values: np.ndarray, shape: tuple[int, int], bc: BoundarySpec2D, width: int = 2) -> np.ndarray:
    """Pad a flattened 2D field; returns an (N2 + 2w, N1 + 2w) array"""
    if width not in (1, 2):
        raise ValueError(f"ghost width must be 1 or 2, got {width}")
    arr = np.asarray(values, dtype=float).reshape(shape)
    arr = _pad_axis(arr, bc.x, width, axis=1)
    return _pad_axis(arr, bc.y, width, axis=0)


# ============= Face Topology =============

@dataclass(frozen=True)
class FaceTopology:
    """Interfaces of a grid together with the ghost-extension map.

    Extended states are ``where(source >= 0, y[source], constant)``; ghost
    cells copy an interior value (periodic / extend_constant) or hold a fixed
    Dirichlet value.
    """

    n_cells: int
    source: np.ndarray
    constant: np.ndarray
    left: np.ndarray
    right: np.ndarray
    far_left: np.ndarray
    far_right: np.ndarray
    left_cell: np.ndarray
    right_cell: np.ndarray
    inv_dx_left: np.ndarray
    inv_dx_right: np.ndarray
    spacing: np.ndarray
    axis: np.ndarray
    coords: np.ndarray
    limited: np.ndarray
    stencil: np.ndarray
    volumes: np.ndarray
    bandwidth: int = 1
    _left_mask: np.ndarray = field(init=False, repr=False)
    _right_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_left_mask", self.left_cell >= 0)
        object.__setattr__(self, "_right_mask", self.right_cell >= 0)

    @property
    def n_faces(self) -> int:
        return len(self.left)

    def extend(self, y: np.ndarray) -> np.ndarray:
        idx = np.where(self.source >= 0, self.source, 0)
        return np.where(self.source >= 0, y[idx], self.constant)

    def divergence(self, face_values: np.ndarray) -> np.ndarray:
        """Per-cell (F_right - F_left)/dx, summed over the faces of each cell"""
        lm, rm = self._left_mask, self._right_mask
        out = np.bincount(self.left_cell[lm], weights=face_values[lm] * self.inv_dx_left[lm],
                          minlength=self.n_cells)
        out -= np.bincount(self.right_cell[rm], weights=face_values[rm] * self.inv_dx_right[rm],
                           minlength=self.n_cells)
        return out

    def cell_sum(self, left_values: np.ndarray, right_values: np.ndarray) -> np.ndarray:
        """Accumulate per-face contributions addressed to the left and right cells"""
        lm, rm = self._left_mask, self._right_mask
        out = np.bincount(self.left_cell[lm], weights=left_values[lm], minlength=self.n_cells)
        out += np.bincount(self.right_cell[rm], weights=right_values[rm], minlength=self.n_cells)
        return out

    def stencil_extrema(self, y_ext: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        vals = y_ext[self.stencil]
        return vals.min(axis=1), vals.max(axis=1)


def _ghost_maps_1d(n: int, bc: BoundarySpec, width: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(n)
    if bc.kind == "dirichlet":
        source = np.pad(idx, (width, width), mode="constant", constant_values=-1)
    else:
        source = np.pad(idx, (width, width), mode="wrap" if bc.kind == "periodic" else "edge")
    constant = _pad_axis(np.zeros(n), bc, width, axis=0)
    return source, constant


def _axis_faces(n: int, offset: int, periodic: bool):
    """Faces along one line of n cells whose extended index is offset + i (width-2 ghosts)"""
    if periodic:
        c = np.arange(n)
        return (offset + c, offset + c + 1, offset + c - 1, offset + c + 2,
                c, (c + 1) % n, np.ones(n, dtype=bool))
    p = np.arange(n + 1)
    left_cell = p - 1
    right_cell = np.where(p < n, p, -1)
    return (offset + p - 1, offset + p, offset + p - 2, offset + p + 1,
            left_cell, right_cell, (p > 0) & (p < n))


def _face_spacing(grid: Grid1D, periodic: bool) -> np.ndarray:
    x = grid.cell_centers
    inner = np.diff(x)
    if periodic:
        wrap = (x[0] - grid.a) + (grid.b - x[-1])
        return np.concatenate((inner, [wrap]))
    return np.concatenate(([grid.cell_sizes[0]], inner, [grid.cell_sizes[-1]]))


def _face_topology_1d(grid: Grid1D, bc: BoundarySpec) -> FaceTopology:
    n = grid.n_cells
    w = 2
    periodic = bc.kind == "periodic"
    source, constant = _ghost_maps_1d(n, bc, w)
    left, right, far_left, far_right, lc, rc, limited = _axis_faces(n, w, periodic)
    inv_dx = 1.0 / grid.cell_sizes
    inv_l = np.where(lc >= 0, inv_dx[np.maximum(lc, 0)], 0.0)
    inv_r = np.where(rc >= 0, inv_dx[np.maximum(rc, 0)], 0.0)
    coords = (grid.interface_positions[1:] if periodic else grid.interface_positions)[:, None]
    cells = np.arange(n) + w
    stencil = np.stack((cells - 1, cells, cells + 1), axis=1)
    return FaceTopology(
        n_cells=n, source=source, constant=constant,
        left=left, right=right, far_left=far_left, far_right=far_right,
        left_cell=lc, right_cell=rc, inv_dx_left=inv_l, inv_dx_right=inv_r,
        spacing=_face_spacing(grid, periodic), axis=np.zeros(len(left), dtype=int),
        coords=coords, limited=limited, stencil=stencil, volumes=grid.cell_sizes.copy(),
    )


def _face_topology_2d(grid: Grid2D, bc: BoundarySpec2D) -> FaceTopology:
    n1, n2 = grid.x.n_cells, grid.y.n_cells
    w = 2
    m1 = n1 + 2 * w
    idx = np.arange(n1 * n2).reshape(n2, n1)
    src = idx.astype(float)
    for axis, spec in ((1, bc.x), (0, bc.y)):
        if spec.kind == "dirichlet":
            src = np.pad(src, _pad_width(2, axis, w), mode="constant", constant_values=-1)
        else:
            src = np.pad(src, _pad_width(2, axis, w), mode="wrap" if spec.kind == "periodic" else "edge")
    source = src.astype(int).ravel()
    constant = ghost_extend_2d(np.zeros(n1 * n2), (n2, n1), bc, w).ravel()

    inv_x = 1.0 / grid.x.cell_sizes
    inv_y = 1.0 / grid.y.cell_sizes
    parts = []

    # first-axis faces, one line per row j
    per_x = bc.x.kind == "periodic"
    sp_x = _face_spacing(grid.x, per_x)
    fx = grid.x.interface_positions[1:] if per_x else grid.x.interface_positions
    for j in range(n2):
        row0 = (j + w) * m1
        left, right, fl, fr, lc, rc, lim = _axis_faces(n1, row0 + w, per_x)
        parts.append((
            left, right, fl, fr,
            np.where(lc >= 0, lc + j * n1, -1), np.where(rc >= 0, rc + j * n1, -1),
            np.where(lc >= 0, inv_x[np.maximum(lc, 0)], 0.0), np.where(rc >= 0, inv_x[np.maximum(rc, 0)], 0.0),
            sp_x, np.zeros(len(left), dtype=int),
            np.column_stack((fx, np.full(len(fx), grid.y.cell_centers[j]))), lim,
        ))

    # second-axis faces, one line per column i; stride m1 in the extended array
    per_y = bc.y.kind == "periodic"
    sp_y = _face_spacing(grid.y, per_y)
    fy = grid.y.interface_positions[1:] if per_y else grid.y.interface_positions
    for i in range(n1):
        left, right, fl, fr, lc, rc, lim = _axis_faces(n2, w, per_y)
        col = i + w
        parts.append((
            left * m1 + col, right * m1 + col, fl * m1 + col, fr * m1 + col,
            np.where(lc >= 0, lc * n1 + i, -1), np.where(rc >= 0, rc * n1 + i, -1),
            np.where(lc >= 0, inv_y[np.maximum(lc, 0)], 0.0), np.where(rc >= 0, inv_y[np.maximum(rc, 0)], 0.0),
            sp_y, np.ones(len(left), dtype=int),
            np.column_stack((np.full(len(fy), grid.x.cell_centers[i]), fy)), lim,
        ))

    cols = list(zip(*parts))
    jj, ii = np.divmod(np.arange(n1 * n2), n1)
    centre = (jj + w) * m1 + ii + w
    stencil = np.stack((centre, centre - 1, centre + 1, centre - m1, centre + m1), axis=1)
    return FaceTopology(
        n_cells=n1 * n2, source=source, constant=constant,
        left=np.concatenate(cols[0]), right=np.concatenate(cols[1]),
        far_left=np.concatenate(cols[2]), far_right=np.concatenate(cols[3]),
        left_cell=np.concatenate(cols[4]), right_cell=np.concatenate(cols[5]),
        inv_dx_left=np.concatenate(cols[6]), inv_dx_right=np.concatenate(cols[7]),
        spacing=np.concatenate(cols[8]), axis=np.concatenate(cols[9]),
        coords=np.concatenate(cols[10]), limited=np.concatenate(cols[11]),
        stencil=stencil, volumes=grid.cell_areas(), bandwidth=n1,
    )


def face_topology(grid: Union[Grid1D, Grid2D], bc: Union[BoundarySpec, BoundarySpec2D]) -> FaceTopology:
    """Face list of a 1D or 2D grid under the given boundary conditions"""
    if isinstance(grid, Grid2D):
        if not isinstance(bc, BoundarySpec2D):
            bc = BoundarySpec2D(x=bc, y=bc)
        topo = _face_topology_2d(grid, bc)
    else:
        if isinstance(bc, BoundarySpec2D):
            bc = bc.x
        topo = _face_topology_1d(grid, bc)
    logger.debug(f"[GRID] topology: cells={topo.n_cells}, faces={topo.n_faces}")
    return topo
