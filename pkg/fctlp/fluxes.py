"""Flux functions and numerical fluxes.

All numerical fluxes are vectorized over numpy arrays of interface states.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

logger = logging.getLogger(__name__)

_FALLBACK_SAMPLES = 10_000


@dataclass(frozen=True)
class FluxFunction:
    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    second_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    deriv_critical_points: tuple[float, ...] = ()
    flux_critical_points: tuple[float, ...] = ()
    is_convex: bool = False
    critical_points_known: bool = True


@dataclass(frozen=True)
class VelocityField:
    """Per-axis velocity samplers u_p(x[, y], t)"""

    components: tuple[Callable[..., np.ndarray], ...]
    stationary: bool = True

    def sample(self, coords: np.ndarray, axis: np.ndarray, t: float) -> np.ndarray:
        u = np.zeros(len(axis))
        for p, component in enumerate(self.components):
            mask = axis == p
            if mask.any():
                u[mask] = component(*coords[mask].T, t)
        if not np.all(np.isfinite(u)):
            raise ValueError("velocity field produced non-finite values")
        return u


# ============= Velocity Fields =============

def constant_velocity(*values: float) -> VelocityField:
    def make(v: float):
        return lambda *args: np.full(np.shape(args[0]), float(v))
    return VelocityField(tuple(make(v) for v in values))


def rotation_velocity(center: tuple[float, float] = (0.5, 0.5), omega: float = 2.0 * math.pi) -> VelocityField:
    """Counterclockwise solid-body rotation, one revolution per 2*pi/omega"""
    cx, cy = center
    return VelocityField((
        lambda x, y, t: -omega * (y - cy),
        lambda x, y, t: omega * (x - cx),
    ))


# ============= Flux Functions =============

def linear_flux(u: float) -> FluxFunction:
    return FluxFunction(
        name="linear",
        eval=lambda y: u * np.asarray(y, dtype=float),
        deriv=lambda y: np.full(np.shape(y), float(u)),
        second_deriv=lambda y: np.zeros(np.shape(y)),
        is_convex=True,
    )


def burgers_flux() -> FluxFunction:
    return FluxFunction(
        name="burgers",
        eval=lambda y: 0.5 * np.square(y),
        deriv=lambda y: np.asarray(y, dtype=float),
        second_deriv=lambda y: np.ones(np.shape(y)),
        flux_critical_points=(0.0,),
        is_convex=True,
    )


def quartic_flux() -> FluxFunction:
    """f = (rho^2 - 1)(rho^2 - 4)/4"""
    r = math.sqrt(5.0 / 6.0)
    return FluxFunction(
        name="quartic",
        eval=lambda y: 0.25 * (np.square(y) - 1.0) * (np.square(y) - 4.0),
        deriv=lambda y: np.power(y, 3) - 2.5 * np.asarray(y, dtype=float),
        second_deriv=lambda y: 3.0 * np.square(y) - 2.5,
        deriv_critical_points=(-r, r),
        flux_critical_points=(-math.sqrt(2.5), 0.0, math.sqrt(2.5)),
    )


def _bl_denominator(y):
    return 5.0 * np.square(y) - 2.0 * y + 1.0


def _bl_second(y):
    y = np.asarray(y, dtype=float)
    return (80.0 * y ** 3 - 120.0 * y ** 2 + 8.0) / _bl_denominator(y) ** 3


def _sign_change_roots(fun: Callable[[float], float], lo: float, hi: float, samples: int = 4001) -> tuple[float, ...]:
    xs = np.linspace(lo, hi, samples)
    vals = fun(xs)
    roots = []
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
        a, b = xs[k], xs[k + 1]
        if vals[k] == 0.0:
            roots.append(float(a))
            continue
        if vals[k + 1] == 0.0:
            continue
        roots.append(float(optimize.bisect(lambda s: float(fun(s)), a, b, xtol=1e-12)))
    return tuple(sorted(set(roots)))


def buckley_leverett_flux(data_range: tuple[float, float] = (-3.0, 3.0)) -> FluxFunction:
    """f = 4 rho^2 / (4 rho^2 + (1 - rho)^2); f' stationary points found by bisection on f''"""
    lo, hi = data_range
    crit = _sign_change_roots(_bl_second, lo, hi)
    logger.debug(f"[FLUX] buckley-leverett f' critical points on [{lo}, {hi}]: {crit}")
    return FluxFunction(
        name="buckley-leverett",
        eval=lambda y: 4.0 * np.square(y) / _bl_denominator(y),
        deriv=lambda y: 8.0 * np.asarray(y, dtype=float) * (1.0 - np.asarray(y)) / _bl_denominator(y) ** 2,
        second_deriv=_bl_second,
        deriv_critical_points=crit,
        flux_critical_points=(0.0, 1.0),
    )


def make_flux(name: str, velocity: float = 1.0, data_range: tuple[float, float] = (-3.0, 3.0)) -> FluxFunction:
    if name == "linear":
        return linear_flux(velocity)
    if name == "burgers":
        return burgers_flux()
    if name == "quartic":
        return quartic_flux()
    if name == "buckley-leverett":
        return buckley_leverett_flux(data_range)
    raise ValueError(f"unknown flux function {name!r}")


# ============= Interval Extrema =============

def _dense_samples(a, b):
    t = np.linspace(0.0, 1.0, _FALLBACK_SAMPLES)
    lo = np.minimum(a, b)[..., None]
    hi = np.maximum(a, b)[..., None]
    return lo + (hi - lo) * t


def interval_max_abs_deriv(flux: FluxFunction, a, b):
    """Exact max of |f'| over [min(a,b), max(a,b)]"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not flux.critical_points_known:
        return np.abs(flux.deriv(_dense_samples(a, b))).max(axis=-1)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    out = np.maximum(np.abs(flux.deriv(lo)), np.abs(flux.deriv(hi)))
    if flux.is_convex:
        return out
    for c in flux.deriv_critical_points:
        inside = (lo <= c) & (c <= hi)
        out = np.where(inside, np.maximum(out, abs(float(flux.deriv(np.float64(c))))), out)
    return out


def _interval_extrema(flux: FluxFunction, lo, hi):
    if not flux.critical_points_known:
        vals = flux.eval(_dense_samples(lo, hi))
        return vals.min(axis=-1), vals.max(axis=-1)
    f_lo, f_hi = flux.eval(lo), flux.eval(hi)
    fmin, fmax = np.minimum(f_lo, f_hi), np.maximum(f_lo, f_hi)
    for c in flux.flux_critical_points:
        inside = (lo <= c) & (c <= hi)
        fc = float(flux.eval(np.float64(c)))
        fmin = np.where(inside, np.minimum(fmin, fc), fmin)
        fmax = np.where(inside, np.maximum(fmax, fc), fmax)
    return fmin, fmax


# ============= Numerical Fluxes =============

def upwind_flux(u, y_left, y_right):
    u = np.asarray(u, dtype=float)
    return 0.5 * (u + np.abs(u)) * y_left + 0.5 * (u - np.abs(u)) * y_right


def centered_flux(u, y_left, y_right):
    return 0.5 * np.asarray(u, dtype=float) * (np.asarray(y_left, dtype=float) + y_right)


def quick_flux(u, y_mm, y_m, y_p, y_pp):
    u = np.asarray(u, dtype=float)
    up, um = 0.5 * (u + np.abs(u)), 0.5 * (u - np.abs(u))
    return up * (0.375 * y_p + 0.75 * y_m - 0.125 * y_mm) + um * (0.375 * y_m + 0.75 * y_p - 0.125 * y_pp)


def quick_antidiffusive_flux(u, y_mm, y_m, y_p, y_pp):
    """QUICK minus upwind"""
    u = np.asarray(u, dtype=float)
    up, um = 0.5 * (u + np.abs(u)), 0.5 * (u - np.abs(u))
    return (0.375 * np.abs(u) * (np.asarray(y_p, dtype=float) - y_m)
            + 0.125 * up * (np.asarray(y_m, dtype=float) - y_mm)
            + 0.125 * um * (np.asarray(y_p, dtype=float) - y_pp))


def rusanov_flux(flux: FluxFunction, y_left, y_right):
    y_left = np.asarray(y_left, dtype=float)
    y_right = np.asarray(y_right, dtype=float)
    lam = interval_max_abs_deriv(flux, y_left, y_right)
    return 0.5 * (flux.eval(y_left) + flux.eval(y_right) - lam * (y_right - y_left))


def godunov_flux(flux: FluxFunction, y_left, y_right):
    y_left = np.asarray(y_left, dtype=float)
    y_right = np.asarray(y_right, dtype=float)
    lo, hi = np.minimum(y_left, y_right), np.maximum(y_left, y_right)
    fmin, fmax = _interval_extrema(flux, lo, hi)
    return np.where(y_left <= y_right, fmin, fmax)


def diffusive_flux(k, y_left, y_right, dx):
    dx = np.asarray(dx, dtype=float)
    if np.any(dx <= 0):
        raise ValueError("interface spacing must be positive")
    return np.asarray(k, dtype=float) * (np.asarray(y_right, dtype=float) - y_left) / dx


def flux_partials(kind: str, flux: FluxFunction, y_left, y_right):
    """(dh/dy_left, dh/dy_right) of a monotone flux; the max |f'| factor is frozen"""
    y_left = np.asarray(y_left, dtype=float)
    y_right = np.asarray(y_right, dtype=float)
    if kind == "rusanov":
        lam = interval_max_abs_deriv(flux, y_left, y_right)
        return 0.5 * (flux.deriv(y_left) + lam), 0.5 * (flux.deriv(y_right) - lam)
    if kind == "godunov":
        h = godunov_flux(flux, y_left, y_right)
        d_left = np.where(h == flux.eval(y_left), np.maximum(flux.deriv(y_left), 0.0), 0.0)
        d_right = np.where(h == flux.eval(y_right), np.minimum(flux.deriv(y_right), 0.0), 0.0)
        return d_left, d_right
    raise ValueError(f"no partials for flux kind {kind!r}")
