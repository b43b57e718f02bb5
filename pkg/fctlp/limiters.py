"""Flux limiter computation.

Limiters scale the antidiffusive flux h^d at every face and time level. They
come either from a linear program (modes LP, LE, LET) or from the closed-form
Zalesak-type bounds (AP, AE). Entropy modes add the linearized cell entropy
inequality to the bound constraints.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from fctlp.entropy import EntropyPair, TadmorPotential, antidiffusive_entropy_term, rusanov_entropy_flux, tadmor_potential
from fctlp.lp import LinearProgram, solve_decomposed
from fctlp.operators import ConservationDiscretization, Discretization
from fctlp.schemas import LimiterMode

logger = logging.getLogger(__name__)

_RANGE_TOL = 1e-12

__all__ = [
    "LimiterField",
    "LimiterBounds",
    "AntidiffusiveStencil",
    "LimiterProblem",
    "LimiterResult",
    "antidiffusive_coefficients",
    "limiter_bounds",
    "approximate_limiters",
    "entropy_limiter_cap",
    "build_lp",
    "compute_limiters",
]


# ============= Domain Types =============

@dataclass(frozen=True)
class LimiterField:
    alpha_n: np.ndarray
    alpha_np1: np.ndarray

    def __post_init__(self):
        for name in ("alpha_n", "alpha_np1"):
            a = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(a)) or np.any(a < -_RANGE_TOL) or np.any(a > 1.0 + _RANGE_TOL):
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, np.clip(a, 0.0, 1.0))

    @classmethod
    def filled(cls, n_faces: int, value: float, mask: Optional[np.ndarray] = None) -> "LimiterField":
        a = np.full(n_faces, float(value))
        if mask is not None:
            a = np.where(mask, a, 0.0)
        return cls(a, a.copy())

    def minimum(self, other: "LimiterField") -> "LimiterField":
        return LimiterField(np.minimum(self.alpha_n, other.alpha_n), np.minimum(self.alpha_np1, other.alpha_np1))

    def for_sigma(self, sigma: float) -> "LimiterField":
        """Copy the active level onto the unused one at sigma 0 or 1"""
        if sigma == 0.0:
            return LimiterField(self.alpha_n, self.alpha_n.copy())
        if sigma == 1.0:
            return LimiterField(self.alpha_np1.copy(), self.alpha_np1)
        return self


@dataclass(frozen=True)
class AntidiffusiveStencil:
    """Face antidiffusive fluxes at both levels; c_ik = -h^d/dx_i on the right face of i, +h^d/dx_i on the left"""

    topology: object
    hd_n: np.ndarray
    hd_np1: np.ndarray

    def levels(self, sigma: float):
        """(level index, time weight, h^d) for every level with nonzero weight"""
        out = []
        for level, weight, hd in ((0, 1.0 - sigma, self.hd_n), (1, sigma, self.hd_np1)):
            if weight > 0.0:
                out.append((level, weight, hd))
        return out

    def coefficients(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        hd = self.hd_n if level == 0 else self.hd_np1
        return -hd * self.topology.inv_dx_left, hd * self.topology.inv_dx_right

    def matrix(self, level: int) -> sparse.csr_matrix:
        """The C matrix: one column per face, nonzero in the two cells it separates"""
        topo = self.topology
        c_left, c_right = self.coefficients(level)
        lm, rm = topo.left_cell >= 0, topo.right_cell >= 0
        faces = np.arange(topo.n_faces)
        return sparse.coo_matrix(
            (np.concatenate((c_left[lm], c_right[rm])),
             (np.concatenate((topo.left_cell[lm], topo.right_cell[rm])), np.concatenate((faces[lm], faces[rm])))),
            shape=(topo.n_cells, topo.n_faces),
        ).tocsr()

    def increment(self, limiters: LimiterField, sigma: float) -> np.ndarray:
        """Weighted sum over both levels of c_ik alpha_k per cell"""
        out = np.zeros(self.topology.n_cells)
        for level, weight, hd in self.levels(sigma):
            alpha = limiters.alpha_n if level == 0 else limiters.alpha_np1
            out -= weight * self.topology.divergence(alpha * hd)
        return out


@dataclass(frozen=True)
class LimiterBounds:
    Q_plus: np.ndarray
    Q_minus: np.ndarray
    P_plus: np.ndarray
    P_minus: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray


@dataclass(frozen=True)
class LimiterProblem:
    """A limiter LP together with the map from variables back to (level, face)"""

    lp: LinearProgram
    level: np.ndarray
    face: np.ndarray
    scale: np.ndarray


@dataclass(frozen=True)
class LimiterResult:
    limiters: LimiterField
    stencil: AntidiffusiveStencil
    bounds: LimiterBounds
    lp_blocks: int = 0
    lp_pivots: int = 0
    fallback: bool = False


# ============= Bounds and Approximate Limiters =============

def antidiffusive_coefficients(disc: Discretization, y_n: np.ndarray, y_np1: np.ndarray,
                               t: float = 0.0, dt: float = 0.0) -> AntidiffusiveStencil:
    return AntidiffusiveStencil(
        topology=disc.topology,
        hd_n=disc.antidiffusive_flux(y_n, t),
        hd_np1=disc.antidiffusive_flux(y_np1, t + dt),
    )


def limiter_bounds(disc: Discretization, y_n: np.ndarray, stencil: AntidiffusiveStencil,
                   sigma: float, dt: float, t: float = 0.0) -> LimiterBounds:
    topo = disc.topology
    y_min, y_max = topo.stencil_extrema(topo.extend(y_n))
    low = (1.0 - sigma) * disc.low_increment(y_n, t)
    q_plus = (y_max - y_n) / dt + low
    q_minus = (y_min - y_n) / dt + low

    p_plus = np.zeros(topo.n_cells)
    p_minus = np.zeros(topo.n_cells)
    for level, weight, _ in stencil.levels(sigma):
        c_left, c_right = stencil.coefficients(level)
        p_plus += weight * topo.cell_sum(np.maximum(c_left, 0.0), np.maximum(c_right, 0.0))
        p_minus += weight * topo.cell_sum(np.minimum(c_left, 0.0), np.minimum(c_right, 0.0))

    with np.errstate(divide="ignore", invalid="ignore"):
        r_plus = np.where(p_plus > 0.0, np.clip(q_plus / p_plus, 0.0, 1.0), 1.0)
        r_minus = np.where(p_minus < 0.0, np.clip(q_minus / p_minus, 0.0, 1.0), 1.0)
    return LimiterBounds(q_plus, q_minus, p_plus, p_minus, r_plus, r_minus)


def approximate_limiters(bounds: LimiterBounds, stencil: AntidiffusiveStencil, sigma: float) -> LimiterField:
    """alpha = min(R+ of the receiving cell, R- of the donor cell), branch keyed on the sign of h^d"""
    topo = stencil.topology
    lc, rc = np.maximum(topo.left_cell, 0), np.maximum(topo.right_cell, 0)
    out = []
    for hd in (stencil.hd_n, stencil.hd_np1):
        alpha = np.where(
            hd >= 0.0,
            np.minimum(bounds.R_minus[lc], bounds.R_plus[rc]),
            np.minimum(bounds.R_plus[lc], bounds.R_minus[rc]),
        )
        out.append(np.where(topo.limited, alpha, 0.0))
    return LimiterField(out[0], out[1]).for_sigma(sigma)


# ============= Entropy Constraints =============

@dataclass(frozen=True)
class _EntropyLevel:
    level: int
    weight: float
    hd: np.ndarray
    lam_left: np.ndarray
    lam_right: np.ndarray


def _require_entropy(disc: Discretization) -> ConservationDiscretization:
    if not isinstance(disc, ConservationDiscretization) or disc.low != "rusanov":
        raise ValueError("entropy constraints need the rusanov/centered conservation-law discretization")
    return disc


def _entropy_rows(disc: Discretization, pair: EntropyPair, y_n: np.ndarray, y_p: np.ndarray,
                  stencil: AntidiffusiveStencil, sigma: float, dt: float):
    """Coefficients lambda_ik of the linearized cell entropy inequality sum lambda alpha >= W_i"""
    disc = _require_entropy(disc)
    topo = disc.topology
    w = pair.U_prime(y_p)
    lc, rc = np.maximum(topo.left_cell, 0), np.maximum(topo.right_cell, 0)
    W = (pair.U(y_p) - pair.U(y_n) - w * (y_p - y_n)) / dt
    levels = []
    for level, weight, hd in stencil.levels(sigma):
        y = y_n if level == 0 else y_p
        yl, yr = disc.face_states(y)
        Hd = np.where(hd != 0.0, antidiffusive_entropy_term(pair, disc.flux, yl, yr), 0.0)
        lam_left = (w[lc] * hd - Hd) * topo.inv_dx_left
        lam_right = -(w[rc] * hd - Hd) * topo.inv_dx_right
        levels.append(_EntropyLevel(level, weight, hd, lam_left, lam_right))
        h_rus = disc.low_flux(y)
        W = W + weight * (topo.divergence(rusanov_entropy_flux(pair, disc.flux, yl, yr)) - w * topo.divergence(h_rus))
    return levels, W


def entropy_limiter_cap(disc: Discretization, pair: EntropyPair, y_n: np.ndarray, y_p: np.ndarray,
                        stencil: AntidiffusiveStencil, sigma: float, dt: float) -> LimiterField:
    """Per-face caps keeping every cell entropy row satisfied whatever the other limiters are"""
    topo = disc.topology
    levels, W = _entropy_rows(disc, pair, y_n, y_p, stencil, sigma, dt)
    Y = np.zeros(topo.n_cells)
    for lv in levels:
        Y += lv.weight * topo.cell_sum(np.minimum(lv.lam_left, 0.0), np.minimum(lv.lam_right, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(Y < 0.0, np.clip(W / Y, 0.0, 1.0), 1.0)

    lc, rc = np.maximum(topo.left_cell, 0), np.maximum(topo.right_cell, 0)
    caps = [np.ones(topo.n_faces), np.ones(topo.n_faces)]
    for lv in levels:
        term_left = np.where((lv.lam_left < 0.0) & (topo.left_cell >= 0), ratio[lc], 1.0)
        term_right = np.where((lv.lam_right < 0.0) & (topo.right_cell >= 0), ratio[rc], 1.0)
        caps[lv.level] = np.minimum(1.0, np.minimum(term_left, term_right))
    return LimiterField(caps[0], caps[1]).for_sigma(sigma)


def _tadmor_rows(disc: ConservationDiscretization, pair: EntropyPair, pot: TadmorPotential,
                 y_n: np.ndarray, y_p: np.ndarray, stencil: AntidiffusiveStencil, sigma: float, dt: float):
    """Coefficients and right-hand side of the Tadmor-form entropy rows (upper bounds)"""
    topo = disc.topology
    lc, rc = np.maximum(topo.left_cell, 0), np.maximum(topo.right_cell, 0)
    v_sigma = sigma * pot.v(y_p) + (1.0 - sigma) * pot.v(y_n)
    rhs = (v_sigma * (y_p - y_n) - (pair.U(y_p) - pair.U(y_n))) / dt
    coeffs = []
    for level, weight, hd in stencil.levels(sigma):
        y = y_n if level == 0 else y_p
        yl, yr = disc.face_states(y)
        vl, vr = pot.v(yl), pot.v(yr)
        v_bar = 0.5 * (vl + vr)
        psi_bar = 0.5 * (pot.psi(vl) + pot.psi(vr))
        gap_left = (v_bar - v_sigma[lc]) * topo.inv_dx_left
        gap_right = -(v_bar - v_sigma[rc]) * topo.inv_dx_right
        h_low = disc.low_flux(y)
        rhs = rhs + weight * (topo.divergence(psi_bar) - topo.cell_sum(gap_left * h_low, gap_right * h_low))
        coeffs.append((level, weight, hd, gap_left * hd, gap_right * hd))
    return coeffs, rhs


# ============= Linear Programs =============

def build_lp(mode: LimiterMode, disc: Discretization, y_n: np.ndarray, y_p: np.ndarray,
             stencil: AntidiffusiveStencil, bounds: LimiterBounds, sigma: float, dt: float,
             pair: Optional[EntropyPair] = None) -> LimiterProblem:
    """Assemble the limiter LP; variables exist only for faces with nonzero h^d"""
    if not mode.exact:
        raise ValueError(f"mode {mode.value} is not solved by linear programming")
    topo = disc.topology
    linear = disc.is_linear

    var_level, var_face, var_scale = [], [], []
    var_offset = {}
    for level, _, hd in stencil.levels(sigma):
        faces = np.flatnonzero(topo.limited & (hd != 0.0))
        var_offset[level] = (sum(len(f) for f in var_face), faces)
        var_level.append(np.full(len(faces), level))
        var_face.append(faces)
        var_scale.append(np.abs(hd[faces]) if linear else np.ones(len(faces)))
    level_arr = np.concatenate(var_level) if var_level else np.zeros(0, dtype=int)
    face_arr = np.concatenate(var_face) if var_face else np.zeros(0, dtype=int)
    scale_arr = np.concatenate(var_scale) if var_scale else np.zeros(0)
    n_vars = len(face_arr)

    rows, cols, vals = [], [], []
    row_lo, row_hi = [], []
    n_rows = 0

    def add_block(coef_by_level, lo, hi):
        """coef_by_level: {level: (left coefficient per face, right coefficient per face)} in alpha units"""
        nonlocal n_rows
        for level, (c_left, c_right) in coef_by_level.items():
            start, faces = var_offset[level]
            idx = start + np.arange(len(faces))
            unit = 1.0 / scale_arr[idx]
            for cells, c in ((topo.left_cell[faces], c_left[faces]), (topo.right_cell[faces], c_right[faces])):
                m = cells >= 0
                rows.append(n_rows + cells[m]); cols.append(idx[m]); vals.append(c[m] * unit[m])
        row_lo.append(lo)
        row_hi.append(hi)
        n_rows += topo.n_cells

    # bound rows: Q- <= sum_l w_l sum_k c_ik alpha_k <= Q+
    add_block(
        {level: tuple(weight * c for c in stencil.coefficients(level)) for level, weight, _ in stencil.levels(sigma)},
        bounds.Q_minus, bounds.Q_plus,
    )

    if mode is LimiterMode.LE:
        levels, W = _entropy_rows(disc, pair, y_n, y_p, stencil, sigma, dt)
        add_block({lv.level: (lv.weight * lv.lam_left, lv.weight * lv.lam_right) for lv in levels},
                  W, np.full(topo.n_cells, np.inf))
    elif mode is LimiterMode.LET:
        cons = _require_entropy(disc)
        coeffs, rhs = _tadmor_rows(cons, pair, tadmor_potential(pair, cons.flux), y_n, y_p, stencil, sigma, dt)
        add_block({level: (weight * cl, weight * cr) for level, weight, _, cl, cr in coeffs},
                  np.full(topo.n_cells, -np.inf), rhs)

    A = sparse.coo_matrix(
        (np.concatenate(vals) if vals else np.zeros(0),
         (np.concatenate(rows) if rows else np.zeros(0, dtype=int), np.concatenate(cols) if cols else np.zeros(0, dtype=int))),
        shape=(n_rows, n_vars),
    ).tocsr()
    lp = LinearProgram(
        objective=np.ones(n_vars),
        lower=np.zeros(n_vars),
        upper=scale_arr.copy() if linear else np.ones(n_vars),
        A=A,
        row_lo=np.concatenate(row_lo),
        row_hi=np.concatenate(row_hi),
    )
    return LimiterProblem(lp=lp, level=level_arr, face=face_arr, scale=scale_arr)


def _field_from_solution(problem: LimiterProblem, x: np.ndarray, stencil: AntidiffusiveStencil,
                         sigma: float) -> LimiterField:
    topo = stencil.topology
    alphas = []
    for level, hd in ((0, stencil.hd_n), (1, stencil.hd_np1)):
        alpha = np.where(topo.limited & (hd == 0.0), 1.0, 0.0)
        m = problem.level == level
        alpha[problem.face[m]] = np.clip(x[m] / problem.scale[m], 0.0, 1.0)
        alphas.append(alpha)
    return LimiterField(alphas[0], alphas[1]).for_sigma(sigma)


# ============= Dispatcher =============

def compute_limiters(mode: LimiterMode, disc: Discretization, y_n: np.ndarray, y_p: np.ndarray,
                     sigma: float, dt: float, t: float = 0.0,
                     pair: Optional[EntropyPair] = None) -> LimiterResult:
    """Limiters for one Picard iterate (or the single explicit pass)"""
    topo = disc.topology
    stencil = antidiffusive_coefficients(disc, y_n, y_p, t, dt)
    bounds = limiter_bounds(disc, y_n, stencil, sigma, dt, t)
    if mode.entropy and pair is None:
        raise ValueError(f"mode {mode.value} needs an entropy pair")

    if mode is LimiterMode.LOW:
        return LimiterResult(LimiterField.filled(topo.n_faces, 0.0), stencil, bounds)
    if mode is LimiterMode.HIGH:
        return LimiterResult(LimiterField.filled(topo.n_faces, 1.0, topo.limited), stencil, bounds)
    if not mode.exact:
        limiters = approximate_limiters(bounds, stencil, sigma)
        if mode is LimiterMode.AE:
            limiters = limiters.minimum(entropy_limiter_cap(disc, pair, y_n, y_p, stencil, sigma, dt))
        return LimiterResult(limiters, stencil, bounds)

    problem = build_lp(mode, disc, y_n, y_p, stencil, bounds, sigma, dt, pair)
    solution = solve_decomposed(problem.lp)
    if not solution.optimal:
        logger.warning(f"[LIMITER] {mode.value} problem infeasible ({problem.lp.n_vars} vars); using alpha = 0")
        return LimiterResult(LimiterField.filled(topo.n_faces, 0.0), stencil, bounds,
                             solution.blocks, solution.pivots, fallback=True)
    logger.debug(f"[LIMITER] {mode.value}: vars={problem.lp.n_vars}, blocks={solution.blocks}, "
                 f"objective={solution.objective_value:.6e}")
    return LimiterResult(_field_from_solution(problem, solution.x, stencil, sigma), stencil, bounds,
                         solution.blocks, solution.pivots)
