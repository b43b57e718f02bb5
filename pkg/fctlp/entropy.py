"""Entropy pairs, numerical entropy fluxes and discrete cell entropy residuals."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, interpolate

from fctlp.fluxes import FluxFunction, godunov_flux, interval_max_abs_deriv, rusanov_flux
from fctlp.grid import FaceTopology

logger = logging.getLogger(__name__)

_TABLE_POINTS = 4096


@dataclass(frozen=True)
class EntropyPair:
    name: str
    U: Callable[[np.ndarray], np.ndarray]
    U_prime: Callable[[np.ndarray], np.ndarray]
    U_second: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TadmorPotential:
    v: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]


def _quadrature_entropy_flux(flux: FluxFunction, table_range: tuple[float, float]):
    """F(rho) = integral_0^rho s f'(s) ds, tabulated and splined"""
    lo, hi = table_range
    integrand = lambda s: s * float(flux.deriv(np.float64(s)))
    n_neg = max(2, int(_TABLE_POINTS * (-lo) / (hi - lo)))
    neg = np.linspace(lo, 0.0, n_neg)
    pos = np.linspace(0.0, hi, _TABLE_POINTS - n_neg + 1)

    def cumulative(nodes):
        pieces = [integrate.quad(integrand, nodes[k], nodes[k + 1], epsabs=1e-12)[0]
                  for k in range(len(nodes) - 1)]
        return np.concatenate(([0.0], np.cumsum(pieces)))

    neg_vals = cumulative(neg[::-1])[::-1]
    pos_vals = cumulative(pos)
    nodes = np.concatenate((neg, pos[1:]))
    table = interpolate.CubicSpline(nodes, np.concatenate((neg_vals, pos_vals[1:])))

    def F(y):
        y = np.asarray(y, dtype=float)
        inside = (y >= lo) & (y <= hi)
        if np.all(inside):
            return table(y)
        logger.debug(f"[ENTROPY] quadrature outside table range for {np.count_nonzero(~inside)} values")
        direct = np.vectorize(lambda s: integrate.quad(integrand, 0.0, s, epsabs=1e-12)[0])
        return np.where(inside, table(np.clip(y, lo, hi)), direct(y))

    return F


def square_entropy(flux: FluxFunction, table_range: tuple[float, float] = (-4.0, 4.0)) -> EntropyPair:
    """U = rho^2 / 2 with a compatible entropy flux F' = U' f'"""
    if flux.name == "linear":
        c = float(flux.deriv(np.float64(0.0)))
        F = lambda y: 0.5 * c * np.square(y)
    elif flux.name == "burgers":
        F = lambda y: np.power(y, 3) / 3.0
    elif flux.name == "quartic":
        F = lambda y: (np.square(y) / 5.0 - 5.0 / 6.0) * np.power(y, 3)
    else:
        F = _quadrature_entropy_flux(flux, table_range)
    return EntropyPair(
        name="square",
        U=lambda y: 0.5 * np.square(y),
        U_prime=lambda y: np.asarray(y, dtype=float),
        U_second=lambda y: np.ones(np.shape(y)),
        F=F,
    )


def tadmor_potential(pair: EntropyPair, flux: FluxFunction) -> TadmorPotential:
    """Entropy variable v = U'(rho) and potential psi = v g - F; needs the square entropy (v = rho)"""
    if pair.name != "square":
        raise ValueError("Tadmor potential is only tabulated for the square entropy")
    return TadmorPotential(
        v=lambda y: np.asarray(y, dtype=float),
        g=flux.eval,
        psi=lambda v: np.asarray(v, dtype=float) * flux.eval(v) - pair.F(v),
    )


# ============= Entropy Fluxes =============

def rusanov_entropy_flux(pair: EntropyPair, flux: FluxFunction, y_left, y_right):
    """Proper numerical entropy flux of the Rusanov scheme"""
    y_left = np.asarray(y_left, dtype=float)
    y_right = np.asarray(y_right, dtype=float)
    lam = interval_max_abs_deriv(flux, y_left, y_right)
    return 0.5 * (pair.F(y_left) + pair.F(y_right) - lam * (pair.U(y_right) - pair.U(y_left)))


def antidiffusive_entropy_term(pair: EntropyPair, flux: FluxFunction, y_left, y_right):
    """H^d for the centered/Rusanov pair"""
    y_left = np.asarray(y_left, dtype=float)
    y_right = np.asarray(y_right, dtype=float)
    lam = interval_max_abs_deriv(flux, y_left, y_right)
    return 0.5 * lam * (pair.U(y_right) - pair.U(y_left))


def tadmor_entropy_flux(pot: TadmorPotential, pair: EntropyPair, y_left, y_right, g_value):
    v_left, v_right = pot.v(y_left), pot.v(y_right)
    return 0.5 * (v_left + v_right) * g_value - 0.5 * (pot.psi(v_left) + pot.psi(v_right))


def proper_flux_defect(entropy_flux: Callable, numerical_flux: Callable, pair: EntropyPair,
                       a, b, eps: float = 1e-6) -> np.ndarray:
    """max over both arguments of |dH/dy_j - U'(y_j) dh/dy_j| by central differences"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dH_a = (entropy_flux(a + eps, b) - entropy_flux(a - eps, b)) / (2 * eps)
    dh_a = (numerical_flux(a + eps, b) - numerical_flux(a - eps, b)) / (2 * eps)
    dH_b = (entropy_flux(a, b + eps) - entropy_flux(a, b - eps)) / (2 * eps)
    dh_b = (numerical_flux(a, b + eps) - numerical_flux(a, b - eps)) / (2 * eps)
    return np.maximum(np.abs(dH_a - pair.U_prime(a) * dh_a), np.abs(dH_b - pair.U_prime(b) * dh_b))


# ============= Cell Residuals =============

def _levels(y_n, y_np1, limiters, sigma):
    for y, alpha, weight in ((y_n, limiters.alpha_n, 1.0 - sigma), (y_np1, limiters.alpha_np1, sigma)):
        if weight > 0.0:
            yield y, alpha, weight


def cell_entropy_residual(pair: EntropyPair, flux: FluxFunction, y_n: np.ndarray, y_np1: np.ndarray,
                          limiters, sigma: float, topology: FaceTopology, dt: float) -> np.ndarray:
    """U(y^{n+1}) - U(y^n) + dt * divergence of the limited Rusanov entropy flux"""
    residual = pair.U(y_np1) - pair.U(y_n)
    for y, alpha, weight in _levels(y_n, y_np1, limiters, sigma):
        ye = topology.extend(y)
        yl, yr = ye[topology.left], ye[topology.right]
        H = rusanov_entropy_flux(pair, flux, yl, yr) + alpha * antidiffusive_entropy_term(pair, flux, yl, yr)
        residual = residual + dt * weight * topology.divergence(H)
    return residual


def tadmor_cell_residual(pot: TadmorPotential, pair: EntropyPair, flux: FluxFunction, y_n: np.ndarray,
                         y_np1: np.ndarray, limiters, sigma: float, topology: FaceTopology, dt: float,
                         low_flux: str = "rusanov") -> np.ndarray:
    """Same residual with the Tadmor entropy flux built on the limited numerical flux"""
    low = godunov_flux if low_flux == "godunov" else rusanov_flux
    residual = pair.U(y_np1) - pair.U(y_n)
    for y, alpha, weight in _levels(y_n, y_np1, limiters, sigma):
        ye = topology.extend(y)
        yl, yr = ye[topology.left], ye[topology.right]
        h_low = low(flux, yl, yr)
        g = h_low + alpha * (0.5 * (flux.eval(yl) + flux.eval(yr)) - h_low)
        residual = residual + dt * weight * topology.divergence(tadmor_entropy_flux(pot, pair, yl, yr, g))
    return residual
