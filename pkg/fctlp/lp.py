"""Bounded-variable simplex for small box-bounded linear programs.

Problems are ``max c^T x`` subject to ``row_lo <= A x <= row_hi`` and
``lower <= x <= upper``. Every two-sided row becomes one slack variable with
box bounds, so the tableau never doubles. Large sparse problems produced by
the limiter engine go through :func:`solve_decomposed`, which removes fixed
variables and redundant rows and solves each independent block densely.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from fctlp import config
from fctlp.errors import LPError

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PHASE1_TOL = 1e-8
DEGENERATE_LIMIT = 50

__all__ = ["LinearProgram", "LPSolution", "LPStatus", "solve", "solve_decomposed", "vertex_oracle"]


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    A: Union[np.ndarray, sparse.spmatrix]
    row_lo: np.ndarray
    row_hi: np.ndarray

    def __post_init__(self):
        n = len(self.objective)
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bounds must have one entry per variable")
        if self.A.shape != (len(self.row_lo), n) or len(self.row_hi) != len(self.row_lo):
            raise ValueError(f"row matrix shape {self.A.shape} inconsistent with {len(self.row_lo)} rows, {n} vars")
        if np.any(self.lower > self.upper) or np.any(self.row_lo > self.row_hi):
            raise ValueError("lower bounds must not exceed upper bounds")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("variables must be box-bounded")
        data = self.A.data if sparse.issparse(self.A) else self.A
        if not (np.all(np.isfinite(data)) and np.all(np.isfinite(self.objective))):
            raise ValueError("coefficients must be finite")

    @classmethod
    def from_rows(cls, objective: Sequence[float], bounds: Sequence[tuple[float, float]],
                  rows: Sequence[tuple[Sequence[float], float, float]]) -> "LinearProgram":
        """Build from (coefficients, row_lo, row_hi) triples"""
        n = len(objective)
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), n)
        return cls(
            objective=np.asarray(objective, dtype=float),
            lower=np.array([b[0] for b in bounds], dtype=float),
            upper=np.array([b[1] for b in bounds], dtype=float),
            A=A,
            row_lo=np.array([r[1] for r in rows], dtype=float),
            row_hi=np.array([r[2] for r in rows], dtype=float),
        )

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.row_lo)

    def dense_rows(self) -> np.ndarray:
        return self.A.toarray() if sparse.issparse(self.A) else np.asarray(self.A, dtype=float)

    def row_scale(self) -> float:
        finite = np.concatenate((self.row_lo[np.isfinite(self.row_lo)], self.row_hi[np.isfinite(self.row_hi)]))
        return 1.0 + (float(np.abs(finite).max()) if finite.size else 0.0)


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray
    objective_value: float
    pivots: int = 0
    blocks: int = 1

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _infeasible(n: int, pivots: int = 0) -> LPSolution:
    return LPSolution(LPStatus.INFEASIBLE, np.full(n, np.nan), float("nan"), pivots)


# ============= Dense Bounded Simplex =============

class _BoundedSimplex:
    """Revised simplex on M z = 0, lb <= z <= ub with an explicit basis inverse"""

    def __init__(self, M: np.ndarray, lb: np.ndarray, ub: np.ndarray, z: np.ndarray, basis: list[int]):
        self.M = M
        self.lb = lb
        self.ub = ub
        self.z = z
        self.basis = np.array(basis, dtype=int)
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.pivots = 0
        self.bland = False
        self._refactor()

    def _refactor(self) -> None:
        try:
            self.Binv = np.linalg.inv(self.M[:, self.basis])
        except np.linalg.LinAlgError as e:
            raise LPError(f"basis matrix became singular: {e}") from e
        nonbasic = ~self.is_basic
        self.z[self.basis] = -self.Binv @ (self.M[:, nonbasic] @ self.z[nonbasic])

    def run(self, cost: np.ndarray) -> None:
        M, lb, ub, z = self.M, self.lb, self.ub, self.z
        m = M.shape[0]
        degenerate = 0
        while True:
            if self.pivots >= config.LP_MAX_PIVOTS:
                raise LPError(f"pivot cap {config.LP_MAX_PIVOTS} exceeded")
            y = cost[self.basis] @ self.Binv
            d = cost - y @ M
            d[self.is_basic] = 0.0
            inc = ~self.is_basic & (d > OPT_TOL) & (z < ub - FEAS_TOL)
            dec = ~self.is_basic & (d < -OPT_TOL) & (z > lb + FEAS_TOL)
            eligible = inc | dec
            if not eligible.any():
                return
            if self.bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if inc[j] else -1.0

            col = self.Binv @ M[:, j]
            delta = -direction * col
            zb = z[self.basis]
            ratios = np.full(m, np.inf)
            down = delta < -PIVOT_TOL
            up = delta > PIVOT_TOL
            ratios[down] = (zb[down] - lb[self.basis][down]) / -delta[down]
            ratios[up] = (ub[self.basis][up] - zb[up]) / delta[up]
            ratios = np.maximum(ratios, 0.0)
            r_min = ratios.min() if m else np.inf
            t_flip = ub[j] - lb[j]
            if not np.isfinite(min(t_flip, r_min)):
                raise LPError("unbounded direction in a box-bounded problem")

            if t_flip <= r_min:
                t = t_flip
                z[self.basis] = zb + t * delta
                z[j] = ub[j] if direction > 0 else lb[j]
            else:
                t = r_min
                ties = np.flatnonzero(ratios <= r_min + 1e-12)
                if self.bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(delta[ties]))])
                z[self.basis] = zb + t * delta
                z[j] += direction * t
                leaving = int(self.basis[r])
                z[leaving] = lb[leaving] if delta[r] < 0 else ub[leaving]
                pivot_row = self.Binv[r] / col[r]
                self.Binv -= np.outer(col, pivot_row)
                self.Binv[r] = pivot_row
                self.is_basic[leaving] = False
                self.is_basic[j] = True
                self.basis[r] = j

            self.pivots += 1
            degenerate = degenerate + 1 if t <= 1e-12 else 0
            if degenerate >= DEGENERATE_LIMIT and not self.bland:
                logger.debug(f"[LP] switching to Bland's rule after {degenerate} degenerate pivots")
                self.bland = True
            if self.pivots % config.LP_REFACTOR_EVERY == 0:
                self._refactor()


def solve(lp: LinearProgram) -> LPSolution:
    """Maximize the objective; returns an optimal vertex or the infeasible status"""
    A = lp.dense_rows()
    c, lo, hi = lp.objective, lp.lower, lp.upper
    keep = np.isfinite(lp.row_lo) | np.isfinite(lp.row_hi)
    A, rlo, rhi = A[keep], lp.row_lo[keep], lp.row_hi[keep]
    m, n = A.shape
    scale = lp.row_scale()

    if m == 0:
        x = np.where(c > 0, hi, lo)
        return LPSolution(LPStatus.OPTIMAL, x, float(c @ x))

    x0 = lo.copy()
    act = A @ x0
    tol = FEAS_TOL * scale
    below, above = act < rlo - tol, act > rhi + tol
    viol = below | above
    art_rows = np.flatnonzero(viol)
    n_art = len(art_rows)

    M = np.zeros((m, n + m + n_art))
    M[:, :n] = A
    M[:, n:n + m] = -np.eye(m)
    target = np.where(below, rlo, rhi)
    M[art_rows, n + m + np.arange(n_art)] = np.sign(target[art_rows] - act[art_rows])
    lb = np.concatenate((lo, rlo, np.zeros(n_art)))
    ub = np.concatenate((hi, rhi, np.full(n_art, np.inf)))
    z = np.zeros(n + m + n_art)
    z[:n] = x0
    z[n:n + m] = np.where(viol, target, act)
    z[n + m:] = np.abs(target[art_rows] - act[art_rows])
    basis = [n + i for i in range(m)]
    for k, i in enumerate(art_rows):
        basis[i] = n + m + k

    simplex = _BoundedSimplex(M, lb, ub, z, basis)
    if n_art:
        cost1 = np.zeros(len(z))
        cost1[n + m:] = -1.0
        simplex.run(cost1)
        infeasibility = float(simplex.z[n + m:].sum())
        if infeasibility > PHASE1_TOL * scale:
            logger.debug(f"[LP] infeasible: phase-1 residual {infeasibility:.3e}")
            return _infeasible(n, simplex.pivots)
        simplex.ub[n + m:] = 0.0
        simplex.z[n + m:] = np.minimum(simplex.z[n + m:], 0.0)
        simplex._refactor()

    cost2 = np.zeros(len(z))
    cost2[:n] = c
    simplex.run(cost2)
    x = np.clip(simplex.z[:n], lo, hi)
    return LPSolution(LPStatus.OPTIMAL, x, float(c @ x), simplex.pivots)


# ============= Presolve and Block Decomposition =============

def solve_decomposed(lp: LinearProgram) -> LPSolution:
    """Solve a sparse LP block by block after removing fixed variables and redundant rows"""
    A = sparse.csr_matrix(lp.A)
    c, lo, hi = lp.objective, lp.lower, lp.upper
    n = lp.n_vars
    x = np.where(c > 0, hi, lo).astype(float)

    fixed = hi <= lo
    shift = A[:, fixed] @ lo[fixed] if fixed.any() else np.zeros(lp.n_rows)
    rlo, rhi = lp.row_lo - shift, lp.row_hi - shift
    free = np.flatnonzero(~fixed)
    Af = A[:, free]
    lo_f, hi_f = lo[free], hi[free]

    a_pos, a_neg = Af.maximum(0), Af.minimum(0)
    min_act = a_pos @ lo_f + a_neg @ hi_f
    max_act = a_pos @ hi_f + a_neg @ lo_f
    bound_mag = np.maximum(np.where(np.isfinite(rlo), np.abs(rlo), 0.0), np.where(np.isfinite(rhi), np.abs(rhi), 0.0))
    tol = FEAS_TOL * (1.0 + bound_mag)
    if np.any(max_act < rlo - tol) or np.any(min_act > rhi + tol):
        logger.debug("[LP] presolve detected an infeasible row")
        return _infeasible(n)

    slack = 1e-12 * (1.0 + bound_mag)
    active = ~((min_act >= rlo - slack) & (max_act <= rhi + slack))
    rows = np.flatnonzero(active)
    B = Af[rows].tocsc()
    touched = np.diff(B.indptr) > 0
    if not touched.any():
        return LPSolution(LPStatus.OPTIMAL, x, float(c @ x), 0, 0)

    m_a = len(rows)
    graph = sparse.bmat([[None, B], [B.T, None]], format="csr")
    _, labels = connected_components(graph, directed=False)
    var_labels = labels[m_a:]
    row_labels = labels[:m_a]

    pivots = 0
    blocks = 0
    var_order = np.argsort(var_labels, kind="stable")
    row_order = np.argsort(row_labels, kind="stable")
    var_sorted, row_sorted = var_labels[var_order], row_labels[row_order]
    Bcsr = B.tocsr()
    for lab in np.unique(var_labels[touched]):
        vs = var_order[np.searchsorted(var_sorted, lab, "left"):np.searchsorted(var_sorted, lab, "right")]
        rs = row_order[np.searchsorted(row_sorted, lab, "left"):np.searchsorted(row_sorted, lab, "right")]
        sub = LinearProgram(
            objective=c[free[vs]], lower=lo_f[vs], upper=hi_f[vs],
            A=Bcsr[rs][:, vs].toarray(), row_lo=rlo[rows[rs]], row_hi=rhi[rows[rs]],
        )
        sol = solve(sub)
        pivots += sol.pivots
        blocks += 1
        if not sol.optimal:
            return _infeasible(n, pivots)
        x[free[vs]] = sol.x
    logger.debug(f"[LP] decomposed: vars={n}, active rows={m_a}, blocks={blocks}, pivots={pivots}")
    return LPSolution(LPStatus.OPTIMAL, x, float(c @ x), pivots, blocks)


# ============= Vertex Enumeration Oracle =============

def vertex_oracle(lp: LinearProgram, max_vars: int = 8, max_rows: int = 12) -> LPSolution:
    """Best basic feasible point by exhaustive enumeration (test oracle)"""
    A = lp.dense_rows()
    m, n = A.shape
    if n > max_vars or m > max_rows:
        raise ValueError(f"oracle limited to {max_vars} vars and {max_rows} rows, got {n} and {m}")
    c, lo, hi = lp.objective, lp.lower, lp.upper
    tol = FEAS_TOL * lp.row_scale()
    best_x: Optional[np.ndarray] = None
    best_val = -np.inf

    for k in range(0, min(n, m) + 1):
        for free in itertools.combinations(range(n), k):
            free = list(free)
            fixed = [j for j in range(n) if j not in free]
            combos = list(itertools.product((0, 1), repeat=len(fixed)))
            bits = np.array(combos, dtype=bool).reshape(len(combos), len(fixed))
            x_fixed = np.where(bits, hi[fixed], lo[fixed])
            for rows in itertools.combinations(range(m), k):
                rows = list(rows)
                if k:
                    sub = A[np.ix_(rows, free)]
                    if abs(np.linalg.det(sub)) < 1e-12:
                        continue
                    sides = np.array(list(itertools.product((0, 1), repeat=k)), dtype=bool)
                    targets = np.where(sides, lp.row_hi[rows], lp.row_lo[rows])
                    if not np.any(np.all(np.isfinite(targets), axis=1)):
                        continue
                    rest = x_fixed @ A[np.ix_(rows, fixed)].T
                    rhs = targets[:, None, :] - rest[None, :, :]
                    with np.errstate(invalid="ignore"):
                        sol = np.linalg.solve(sub, rhs.reshape(-1, k).T).T
                    cand = np.empty((sol.shape[0], n))
                    cand[:, free] = sol
                    cand[:, fixed] = np.tile(x_fixed, (len(sides), 1))
                else:
                    cand = np.empty((len(x_fixed), n))
                    cand[:, fixed] = x_fixed
                cand = cand[np.all(np.isfinite(cand), axis=1)]
                if not len(cand):
                    continue
                act = cand @ A.T
                ok = (np.all(cand >= lo - tol, axis=1) & np.all(cand <= hi + tol, axis=1)
                      & np.all(act >= lp.row_lo - tol, axis=1) & np.all(act <= lp.row_hi + tol, axis=1))
                if not ok.any():
                    continue
                vals = cand[ok] @ c
                i = int(np.argmax(vals))
                if vals[i] > best_val + 1e-12:
                    best_val = float(vals[i])
                    best_x = cand[ok][i]

    if best_x is None:
        return _infeasible(n)
    return LPSolution(LPStatus.OPTIMAL, best_x, best_val)
