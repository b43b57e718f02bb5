"""Time stepping: explicit and Picard-iterated weighted steps, banded solves and CFL guards."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg, sparse

from fctlp import config
from fctlp.entropy import EntropyPair, cell_entropy_residual, rusanov_entropy_flux
from fctlp.errors import CFLViolationError, NonlinearSolveError, PicardDivergenceError, SingularOperatorError
from fctlp.limiters import LimiterField, LimiterResult, compute_limiters
from fctlp.operators import ConservationDiscretization, Discretization
from fctlp.schemas import SchemeConfig

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-14
CFL_SLACK = 1e-12
NEWTON_TOL = 1e-11
NEWTON_MAX_STEPS = 100

__all__ = [
    "BandedOperator",
    "StepReport",
    "solve_banded",
    "max_stable_dt",
    "check_cfl",
    "entropy_dt_condition",
    "explicit_step",
    "picard_step",
    "solve_implicit_nonlinear",
    "step",
]


# ============= Banded Linear Algebra =============

@dataclass(frozen=True)
class BandedOperator:
    """Matrix in LAPACK banded storage plus any entries outside the band (periodic corners)"""

    ab: np.ndarray
    lower: int
    upper: int
    outside_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    outside_cols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    outside_vals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n(self) -> int:
        return self.ab.shape[1]

    @classmethod
    def from_sparse(cls, matrix, lower: int, upper: Optional[int] = None) -> "BandedOperator":
        upper = lower if upper is None else upper
        coo = sparse.coo_matrix(matrix)
        coo.sum_duplicates()
        n = coo.shape[0]
        offset = coo.col - coo.row
        inside = (offset <= upper) & (offset >= -lower)
        ab = np.zeros((lower + upper + 1, n))
        ab[upper - offset[inside], coo.col[inside]] = coo.data[inside]
        return cls(ab, lower, upper, coo.row[~inside], coo.col[~inside], coo.data[~inside])

    @classmethod
    def from_dense(cls, matrix: np.ndarray, lower: int, upper: Optional[int] = None) -> "BandedOperator":
        return cls.from_sparse(sparse.coo_matrix(np.asarray(matrix, dtype=float)), lower, upper)

    def diagonal(self) -> np.ndarray:
        return self.ab[self.upper]

    def to_sparse(self) -> sparse.csr_matrix:
        diags, offsets = [], []
        for k in range(-self.lower, self.upper + 1):
            row = self.ab[self.upper - k]
            diags.append(row[max(k, 0):self.n + min(k, 0)])
            offsets.append(k)
        band = sparse.diags(diags, offsets, shape=(self.n, self.n), format="csr")
        extra = sparse.coo_matrix((self.outside_vals, (self.outside_rows, self.outside_cols)), shape=(self.n, self.n))
        return (band + extra).tocsr()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_sparse() @ x


def solve_banded(op: BandedOperator, rhs: np.ndarray) -> np.ndarray:
    """Solve op x = rhs; entries outside the band are handled by a Woodbury correction"""
    if np.any(np.abs(op.diagonal()) < PIVOT_TOL):
        raise SingularOperatorError(f"diagonal entry below {PIVOT_TOL:g}")
    rhs = np.asarray(rhs, dtype=float)
    try:
        if len(op.outside_vals) == 0:
            x = linalg.solve_banded((op.lower, op.upper), op.ab, rhs)
        else:
            rows = np.unique(op.outside_rows)
            k = len(rows)
            U = np.zeros((op.n, k))
            U[rows, np.arange(k)] = 1.0
            VT = np.zeros((k, op.n))
            np.add.at(VT, (np.searchsorted(rows, op.outside_rows), op.outside_cols), op.outside_vals)
            solved = linalg.solve_banded((op.lower, op.upper), op.ab, np.column_stack((rhs, U)))
            z, Z = solved[:, 0], solved[:, 1:]
            capacitance = np.eye(k) + VT @ Z
            x = z - Z @ np.linalg.solve(capacitance, VT @ z)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularOperatorError(f"banded solve failed: {e}") from e
    if not np.all(np.isfinite(x)):
        raise SingularOperatorError("banded solve produced non-finite values")
    return x


# ============= Stability Bounds =============

def max_stable_dt(disc: Discretization, y: np.ndarray, sigma: float, t: float = 0.0) -> float:
    """Largest dt keeping the explicit part of the low-order scheme monotone"""
    if sigma >= 1.0:
        return math.inf
    rate = float(np.max(disc.diagonal_rate(y, t)))
    if rate <= 0.0:
        return math.inf
    return 1.0 / ((1.0 - sigma) * rate)


def check_cfl(dt: float, dt_max: float, step_index: Optional[int] = None) -> None:
    if dt <= dt_max * (1.0 + CFL_SLACK):
        return
    if config.STRICT_CFL:
        raise CFLViolationError(dt, dt_max, step_index)
    logger.warning(f"[STEP] dt={dt:.6e} above stable bound {dt_max:.6e} (step {step_index})")


def entropy_dt_condition(pair: EntropyPair, disc: Discretization, y: np.ndarray, dt: float,
                         sigma: float, tol: float = 1e-12) -> bool:
    """Sufficient dt condition for the low-order cell entropy inequality (diagnostic only)"""
    if not isinstance(disc, ConservationDiscretization) or disc.low != "rusanov":
        return True
    topo = disc.topology
    yl, yr = disc.face_states(y)
    dh = topo.divergence(disc.low_flux(y))
    dH = topo.divergence(rusanov_entropy_flux(pair, disc.flux, yl, yr))
    u2_max = float(pair.U_second(np.float64(np.max(y))))
    u2_min = float(pair.U_second(np.float64(np.min(y))))
    lhs = (1.0 - sigma) * dt * u2_max ** 2 * dh ** 2
    rhs = 2.0 * u2_min * (pair.U_prime(y) * dh - dH)
    return bool(np.all(lhs <= rhs + tol))


# ============= Reports =============

@dataclass
class StepReport:
    picard_iterations: int = 1
    alpha_min: float = 1.0
    alpha_mean: float = 1.0
    entropy_residual_max: Optional[float] = None
    conservation_drift: float = 0.0
    lp_blocks: int = 0
    lp_pivots: int = 0
    fallbacks: int = 0
    newton_iterations: int = 0

    def __post_init__(self):
        for name in ("picard_iterations", "lp_blocks", "lp_pivots", "fallbacks", "newton_iterations"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def _alpha_stats(result: LimiterResult, sigma: float) -> tuple[float, float]:
    topo = result.stencil.topology
    if sigma < 1.0:
        alpha, hd = result.limiters.alpha_n, result.stencil.hd_n
    else:
        alpha, hd = result.limiters.alpha_np1, result.stencil.hd_np1
    active = topo.limited & (hd != 0.0)
    if not active.any():
        return 1.0, 1.0
    return float(alpha[active].min()), float(alpha[active].mean())


def _drift(disc: Discretization, y_old: np.ndarray, y_new: np.ndarray) -> float:
    vol = disc.topology.volumes
    scale = max(float(np.sum(vol * np.abs(y_old))), np.finfo(float).tiny)
    return abs(float(np.sum(vol * (y_new - y_old)))) / scale


def _report(disc, y_n, y_new, result, cfg: SchemeConfig, pair, iterations, newton, blocks, pivots, fallbacks):
    a_min, a_mean = _alpha_stats(result, cfg.sigma)
    residual = None
    if pair is not None and isinstance(disc, ConservationDiscretization) and disc.low == "rusanov":
        residual = float(np.max(cell_entropy_residual(
            pair, disc.flux, y_n, y_new, result.limiters, cfg.sigma, disc.topology, cfg.dt)))
    return StepReport(
        picard_iterations=iterations, alpha_min=a_min, alpha_mean=a_mean,
        entropy_residual_max=residual, conservation_drift=_drift(disc, y_n, y_new),
        lp_blocks=blocks, lp_pivots=pivots, fallbacks=fallbacks, newton_iterations=newton,
    )


# ============= Implicit Solves =============

def solve_implicit_nonlinear(disc: Discretization, rhs: np.ndarray, sigma: float, dt: float, t: float = 0.0,
                             y_guess: Optional[np.ndarray] = None, step_index: Optional[int] = None
                             ) -> tuple[np.ndarray, int]:
    """Solve y + sigma dt D(h^L(y)) = rhs by damped Newton, falling back to Jacobi sweeps"""
    if sigma <= 0.0:
        raise ValueError("implicit solve needs sigma > 0")
    n = disc.topology.n_cells
    bw = disc.topology.bandwidth
    eye = sparse.identity(n, format="csr")
    y = np.array(rhs if y_guess is None else y_guess, dtype=float)
    tol = NEWTON_TOL * max(1.0, float(np.max(np.abs(rhs))))

    def residual(v):
        return v + sigma * dt * disc.low_divergence(v, t) - rhs

    G = residual(y)
    norm = float(np.max(np.abs(G)))
    newton = True
    for k in range(1, NEWTON_MAX_STEPS + 1):
        if norm <= tol:
            logger.debug(f"[NEWTON] converged in {k - 1} steps, residual={norm:.3e}")
            return y, k - 1
        if newton:
            J, _ = disc.jacobian(y, t)
            delta = solve_banded(BandedOperator.from_sparse(eye + sigma * dt * J, bw), -G)
            lam = 1.0
            while lam >= 1.0 / 64.0:
                trial = y + lam * delta
                G_trial = residual(trial)
                trial_norm = float(np.max(np.abs(G_trial)))
                if trial_norm < (1.0 - 1e-4 * lam) * norm:
                    break
                lam *= 0.5
            else:
                logger.debug(f"[NEWTON] stalled at residual {norm:.3e}; switching to sweeps")
                newton = False
                continue
        else:
            diag = 1.0 + sigma * dt * disc.diagonal_rate(y, t)
            trial = y - G / diag
            G_trial = residual(trial)
            trial_norm = float(np.max(np.abs(G_trial)))
        y, G, norm = trial, G_trial, trial_norm
    if norm <= tol:
        return y, NEWTON_MAX_STEPS
    raise NonlinearSolveError(norm, step_index)


def _advance(disc: Discretization, y_n: np.ndarray, result: LimiterResult, cfg: SchemeConfig, t: float,
             y_guess: np.ndarray, step_index: Optional[int]) -> tuple[np.ndarray, int]:
    sigma, dt = cfg.sigma, cfg.dt
    rhs = y_n + dt * result.stencil.increment(result.limiters, sigma)
    if sigma < 1.0:
        rhs = rhs - dt * (1.0 - sigma) * disc.low_divergence(y_n, t)
    if sigma == 0.0:
        return rhs, 0
    if disc.is_linear:
        A, g = disc.assemble(t + dt)
        op = BandedOperator.from_sparse(sparse.identity(len(y_n), format="csr") + sigma * dt * A,
                                        disc.topology.bandwidth)
        return solve_banded(op, rhs + sigma * dt * g), 0
    return solve_implicit_nonlinear(disc, rhs, sigma, dt, t + dt, y_guess, step_index)


# ============= Steps =============

def explicit_step(disc: Discretization, y_n: np.ndarray, cfg: SchemeConfig, t: float = 0.0,
                  pair: Optional[EntropyPair] = None, step_index: Optional[int] = None
                  ) -> tuple[np.ndarray, LimiterField, StepReport]:
    """Single-pass sigma = 0 step: limiters from y^n, then the conservative update"""
    if cfg.sigma != 0.0:
        raise ValueError("explicit_step needs sigma = 0")
    check_cfl(cfg.dt, max_stable_dt(disc, y_n, 0.0, t), step_index)
    result = compute_limiters(cfg.limiter_mode, disc, y_n, y_n, 0.0, cfg.dt, t, pair)
    y_new, _ = _advance(disc, y_n, result, cfg, t, y_n, step_index)
    report = _report(disc, y_n, y_new, result, cfg, pair, 1, 0, result.lp_blocks, result.lp_pivots,
                     int(result.fallback))
    return y_new, result.limiters, report


def picard_step(disc: Discretization, y_n: np.ndarray, cfg: SchemeConfig, t: float = 0.0,
                pair: Optional[EntropyPair] = None, step_index: Optional[int] = None
                ) -> tuple[np.ndarray, LimiterField, StepReport]:
    """Alternate limiter computation at iterate p with the implicit solve until the stop criterion holds"""
    sigma, picard = cfg.sigma, cfg.picard
    check_cfl(cfg.dt, max_stable_dt(disc, y_n, sigma, t), step_index)
    y_p = y_n.copy()
    previous: Optional[LimiterField] = None
    newton_total = blocks = pivots = fallbacks = 0
    changes = (math.inf, math.inf, math.inf)

    for iteration in range(1, picard.max_iters + 1):
        result = compute_limiters(cfg.limiter_mode, disc, y_n, y_p, sigma, cfg.dt, t, pair)
        fallbacks += int(result.fallback)
        blocks += result.lp_blocks
        pivots += result.lp_pivots
        y_new, newton = _advance(disc, y_n, result, cfg, t, y_p, step_index)
        newton_total += newton

        # every cell relative to itself, every face; the first iterate has no limiter to compare with
        state_change = float(np.max(np.abs(y_new - y_p) / np.maximum(picard.delta, np.abs(y_new))))
        if previous is None:
            d_n = d_np1 = math.inf
        else:
            d_n = float(np.max(np.abs(result.limiters.alpha_n - previous.alpha_n), initial=0.0))
            d_np1 = float(np.max(np.abs(result.limiters.alpha_np1 - previous.alpha_np1), initial=0.0))
        changes = (state_change, d_n, d_np1)
        y_p, previous = y_new, result.limiters
        logger.debug(f"[PICARD] iter={iteration}, state={state_change:.3e}, alpha_n={d_n:.3e}, alpha_np1={d_np1:.3e}")
        if state_change < picard.eps1 and d_n < picard.eps2 and d_np1 < picard.eps2:
            report = _report(disc, y_n, y_new, result, cfg, pair, iteration, newton_total, blocks, pivots, fallbacks)
            return y_new, result.limiters, report

    raise PicardDivergenceError(picard.max_iters, *changes, step=step_index)


def step(disc: Discretization, y: np.ndarray, cfg: SchemeConfig, t: float = 0.0,
         pair: Optional[EntropyPair] = None, step_index: Optional[int] = None
         ) -> tuple[np.ndarray, LimiterField, StepReport]:
    """Explicit single pass when sigma = 0 without entropy rows, Picard iteration otherwise"""
    if cfg.sigma == 0.0 and not cfg.limiter_mode.entropy:
        return explicit_step(disc, y, cfg, t, pair, step_index)
    return picard_step(disc, y, cfg, t, pair, step_index)
