"""Spatial discretizations of the monotone low-order scheme and its antidiffusive correction.

Both discretizations work on a :class:`~fctlp.grid.FaceTopology` and expose the
same surface to the limiter engine and the stepper:

- ``low_flux`` / ``antidiffusive_flux``: face values h^L and h^d = h^H - h^L
- ``low_increment``: the monotone part of the cell increment used by the bounds
- ``jacobian``: sparse d D(h^L) / d y, plus the boundary vector for linear problems
- ``diagonal_rate``: a_ii, the self-coupling entering the CFL bound
"""
from __future__ import annotations

import logging
from typing import Literal, Sequence, Union

import numpy as np
from scipy import sparse

from fctlp.fluxes import (
    FluxFunction,
    VelocityField,
    centered_flux,
    flux_partials,
    godunov_flux,
    quick_antidiffusive_flux,
    rusanov_flux,
)
from fctlp.grid import FaceTopology

logger = logging.getLogger(__name__)

DEGENERATE_JUMP = 1e-14


class Discretization:
    is_linear: bool = False
    high: str = "centered"

    def __init__(self, topology: FaceTopology):
        self.topology = topology

    def face_states(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ye = self.topology.extend(y)
        return ye[self.topology.left], ye[self.topology.right]

    # subclasses fill these in
    def low_flux(self, y: np.ndarray, t: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def low_partials(self, y: np.ndarray, t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _raw_antidiffusive_flux(self, y: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def antidiffusive_flux(self, y: np.ndarray, t: float = 0.0) -> np.ndarray:
        """h^d on limited faces; exactly 0 across degenerate jumps and on boundary faces"""
        topo = self.topology
        hd = self._raw_antidiffusive_flux(y, t)
        ye = topo.extend(y)
        scale = DEGENERATE_JUMP * max(float(np.max(np.abs(y))) if len(y) else 0.0, np.finfo(float).tiny)
        flat = np.abs(ye[topo.right] - ye[topo.left]) < scale
        if self.high == "quick":
            flat &= np.abs(ye[topo.left] - ye[topo.far_left]) < scale
            flat &= np.abs(ye[topo.far_right] - ye[topo.right]) < scale
        return np.where(flat | ~topo.limited, 0.0, hd)

    def low_divergence(self, y: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.topology.divergence(self.low_flux(y, t))

    def low_increment(self, y: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.low_divergence(y, t)

    def diagonal_rate(self, y: np.ndarray, t: float = 0.0) -> np.ndarray:
        """a_ii: derivative of the cell's low-order divergence with respect to its own interior state"""
        topo = self.topology
        p_left, p_right = self.low_partials(y, t)
        return topo.cell_sum(p_left * topo.inv_dx_left, -p_right * topo.inv_dx_right)

    def jacobian(self, y: np.ndarray, t: float = 0.0) -> tuple[sparse.csr_matrix, np.ndarray]:
        """(J, offset) with D(h^L(y)) = J y + offset for flux linear in the states"""
        p_left, p_right = self.low_partials(y, t)
        return divergence_matrix(self.topology, p_left, p_right)


def divergence_matrix(topo: FaceTopology, p_left: np.ndarray, p_right: np.ndarray
                      ) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Scatter per-face partials into the cell-by-cell matrix of the divergence operator"""
    rows, cols, data = [], [], []
    offset = np.zeros(topo.n_cells)
    lc, rc = topo.left_cell, topo.right_cell
    for states, p in ((topo.left, p_left), (topo.right, p_right)):
        src = topo.source[states]
        interior = src >= 0
        m = interior & (lc >= 0)
        rows.append(lc[m]); cols.append(src[m]); data.append(p[m] * topo.inv_dx_left[m])
        m = interior & (rc >= 0)
        rows.append(rc[m]); cols.append(src[m]); data.append(-p[m] * topo.inv_dx_right[m])
        ghost = np.where(interior, 0.0, p * topo.constant[states])
        offset += topo.cell_sum(ghost * topo.inv_dx_left, -ghost * topo.inv_dx_right)
    n = topo.n_cells
    J = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return J, offset


# ============= Linear Convection-Diffusion =============

class LinearDiscretization(Discretization):
    """Upwind convection plus the minimal diffusion keeping the low-order scheme monotone"""

    is_linear = True

    def __init__(self, topology: FaceTopology, velocity: VelocityField,
                 diffusivity: Union[float, Sequence[float]] = 0.0,
                 high: Literal["centered", "quick"] = "centered"):
        super().__init__(topology)
        per_axis = np.atleast_1d(np.asarray(diffusivity, dtype=float))
        if np.any(per_axis < 0) or not np.all(np.isfinite(per_axis)):
            raise ValueError(f"diffusivity must be finite and non-negative, got {diffusivity}")
        if len(per_axis) == 1:
            per_axis = np.repeat(per_axis, int(topology.axis.max()) + 1 if topology.n_faces else 1)
        if len(per_axis) <= int(topology.axis.max()):
            raise ValueError("one diffusivity per axis required")
        if high not in ("centered", "quick"):
            raise ValueError(f"unknown high-order flux {high!r}")
        self.velocity = velocity
        self.diffusivity = per_axis
        self.k_face = per_axis[topology.axis]
        self.high = high
        self._cached: dict[float, np.ndarray] = {}

    def face_velocity(self, t: float = 0.0) -> np.ndarray:
        key = 0.0 if self.velocity.stationary else float(t)
        if key not in self._cached:
            if len(self._cached) > 4:
                self._cached.clear()
            self._cached[key] = self.velocity.sample(self.topology.coords, self.topology.axis, key)
        return self._cached[key]

    def coefficients(self, t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """(c+, c-) with h^L = c+ y_left + c- y_right; c+ >= 0 >= c-"""
        u = self.face_velocity(t)
        k_over_dx = self.k_face / self.topology.spacing
        if self.high == "quick":
            d = k_over_dx
        else:
            d = np.maximum(0.0, k_over_dx - 0.5 * np.abs(u))
        return 0.5 * (u + np.abs(u)) + d, 0.5 * (u - np.abs(u)) - d

    def low_flux(self, y, t=0.0):
        cp, cm = self.coefficients(t)
        yl, yr = self.face_states(y)
        return cp * yl + cm * yr

    def low_partials(self, y, t=0.0):
        return self.coefficients(t)

    def high_flux(self, y, t=0.0):
        topo = self.topology
        ye = topo.extend(y)
        u = self.face_velocity(t)
        diffusion = self.k_face * (ye[topo.right] - ye[topo.left]) / topo.spacing
        if self.high == "quick":
            return self.low_flux(y, t) + quick_antidiffusive_flux(
                u, ye[topo.far_left], ye[topo.left], ye[topo.right], ye[topo.far_right])
        return centered_flux(u, ye[topo.left], ye[topo.right]) - diffusion

    def _raw_antidiffusive_flux(self, y, t):
        topo = self.topology
        ye = topo.extend(y)
        u = self.face_velocity(t)
        if self.high == "quick":
            return quick_antidiffusive_flux(u, ye[topo.far_left], ye[topo.left], ye[topo.right], ye[topo.far_right])
        return self.antidiffusive_weight(t) * (ye[topo.right] - ye[topo.left])

    def antidiffusive_weight(self, t: float = 0.0) -> np.ndarray:
        """max(0, |u|/2 - k/dx): h^d = weight * jump for the centered high-order flux"""
        u = self.face_velocity(t)
        return np.maximum(0.0, 0.5 * np.abs(u) - self.k_face / self.topology.spacing)

    def low_increment(self, y, t=0.0):
        """sum_{j != i} a_ij (y_j - y_i), ghost neighbors included"""
        topo = self.topology
        cp, cm = self.coefficients(t)
        yl, yr = self.face_states(y)
        jump = yr - yl
        return topo.cell_sum(cm * topo.inv_dx_left * jump, cp * topo.inv_dx_right * jump)

    def assemble(self, t: float = 0.0) -> tuple[sparse.csr_matrix, np.ndarray]:
        """(A, g) with D(h^L(y)) = A y - g"""
        A, offset = self.jacobian(np.zeros(self.topology.n_cells), t)
        return A, -offset


# ============= Scalar Conservation Laws =============

class ConservationDiscretization(Discretization):
    """Rusanov or Godunov low-order flux with the centered high-order flux"""

    def __init__(self, topology: FaceTopology, flux: FluxFunction, low: Literal["rusanov", "godunov"] = "rusanov"):
        super().__init__(topology)
        if low not in ("rusanov", "godunov"):
            raise ValueError(f"unknown low-order flux {low!r} for a conservation law")
        self.flux = flux
        self.low = low
        self.high = "centered"

    def low_flux(self, y, t=0.0):
        yl, yr = self.face_states(y)
        if self.low == "godunov":
            return godunov_flux(self.flux, yl, yr)
        return rusanov_flux(self.flux, yl, yr)

    def low_partials(self, y, t=0.0):
        yl, yr = self.face_states(y)
        return flux_partials(self.low, self.flux, yl, yr)

    def high_flux(self, y, t=0.0):
        yl, yr = self.face_states(y)
        return 0.5 * (self.flux.eval(yl) + self.flux.eval(yr))

    def _raw_antidiffusive_flux(self, y, t):
        return self.high_flux(y, t) - self.low_flux(y, t)
