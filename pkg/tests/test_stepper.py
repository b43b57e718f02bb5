import math
from dataclasses import replace

import numpy as np
import pytest

from fctlp import config, stepper
from fctlp.entropy import cell_entropy_residual, square_entropy
from fctlp.errors import CFLViolationError, PicardDivergenceError, SingularOperatorError
from fctlp.fluxes import burgers_flux, quartic_flux
from fctlp.grid import build_uniform_grid, face_topology
from fctlp.limiters import LimiterField
from fctlp.operators import ConservationDiscretization
from fctlp.schemas import BoundarySpec, LimiterMode, PicardParams, SchemeConfig
from fctlp.stepper import (
    BandedOperator,
    StepReport,
    check_cfl,
    explicit_step,
    max_stable_dt,
    picard_step,
    solve_banded,
    solve_implicit_nonlinear,
    step,
)
from tests.helpers import make_advection


def _smooth(n, length=1.0):
    x = (np.arange(n) + 0.5) * length / n
    return np.sin(2 * np.pi * x / length) + 1.5


def _total(disc, y):
    return float(np.sum(disc.topology.volumes * y))


# ============= Banded Solves =============

class TestSolveBanded:
    def test_identity(self):
        """I x = b returns b"""
        b = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(solve_banded(BandedOperator.from_dense(np.eye(3), 1), b), b)

    def test_tridiagonal_example(self):
        """[[2,-1,0],[-1,2,-1],[0,-1,2]] x = (1,0,1) gives x = (1,1,1)"""
        M = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]])
        x = solve_banded(BandedOperator.from_dense(M, 1), np.array([1.0, 0.0, 1.0]))
        np.testing.assert_allclose(x, [1.0, 1.0, 1.0], atol=1e-14)

    def test_matches_dense_solve(self, rng):
        """Random diagonally dominant pentadiagonal system"""
        n = 50
        M = np.zeros((n, n))
        for k in range(-2, 3):
            M += np.diag(rng.uniform(-1, 1, n - abs(k)), k)
        M += np.diag(np.full(n, 5.0))
        b = rng.normal(size=n)
        x = solve_banded(BandedOperator.from_dense(M, 2), b)
        np.testing.assert_allclose(x, np.linalg.solve(M, b), atol=1e-10)

    def test_periodic_corners(self, rng):
        """Entries outside the band go through the Woodbury correction"""
        n = 12
        M = 3.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        M[0, -1] = M[-1, 0] = -1.0
        b = rng.normal(size=n)
        op = BandedOperator.from_dense(M, 1)
        assert len(op.outside_vals) == 2
        np.testing.assert_allclose(solve_banded(op, b), np.linalg.solve(M, b), atol=1e-12)
        np.testing.assert_allclose(op.to_sparse().toarray(), M)

    def test_zero_pivot(self):
        """A vanishing diagonal entry is reported"""
        M = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(SingularOperatorError):
            solve_banded(BandedOperator.from_dense(M, 1), np.ones(2))


# ============= Stability Bounds =============

class TestMaxStableDt:
    @pytest.mark.parametrize("sigma, expected", [(0.0, 0.01), (0.5, 0.02), (1.0, math.inf)])
    def test_upwind_examples(self, sigma, expected):
        """u = 1, dx = 0.01"""
        disc = make_advection(400, 4.0)
        assert max_stable_dt(disc, np.zeros(400), sigma) == pytest.approx(expected)

    def test_check_cfl_strict(self):
        """Strict mode raises with both numbers attached"""
        with pytest.raises(CFLViolationError) as exc:
            check_cfl(0.02, 0.01, step_index=7)
        assert exc.value.dt == 0.02 and exc.value.step == 7

    def test_check_cfl_lenient(self, monkeypatch, caplog):
        """Lenient mode logs and carries on"""
        monkeypatch.setattr(config, "STRICT_CFL", False)
        check_cfl(0.02, 0.01)
        assert "above stable bound" in caplog.text

    def test_slack_accepts_round_off(self):
        """dt at the bound up to a relative 1e-12"""
        check_cfl(0.01 * (1 + 1e-13), 0.01)


# ============= Explicit Steps =============

class TestExplicitStep:
    def test_clipped_interface_example(self, periodic):
        """y=(1,1,0,0), dt=0.5: the face between cells 2 and 3 stays closed"""
        disc = make_advection(4, bc=periodic)
        y = np.array([1.0, 1.0, 0.0, 0.0])
        y_new, limiters, report = explicit_step(disc, y, SchemeConfig(dt=0.5, limiter_mode=LimiterMode.AP))
        assert limiters.alpha_n[1] == 0.0
        assert isinstance(report, StepReport)
        assert np.all((y_new >= -1e-12) & (y_new <= 1.0 + 1e-12))

    @pytest.mark.parametrize("mode", [LimiterMode.AP, LimiterMode.LP])
    def test_local_bounds(self, rng, periodic, mode):
        """Every new value stays inside its stencil range"""
        disc = make_advection(40, 4.0, bc=periodic)
        topo = disc.topology
        cfg = SchemeConfig(dt=0.05, limiter_mode=mode)
        tol = 1e-10 if mode is LimiterMode.AP else 1e-8
        for _ in range(30):
            y = rng.uniform(0, 1, 40)
            y_min, y_max = topo.stencil_extrema(topo.extend(y))
            y_new, _, _ = explicit_step(disc, y, cfg)
            assert np.all(y_new >= y_min - tol)
            assert np.all(y_new <= y_max + tol)

    @pytest.mark.parametrize("mode", [LimiterMode.AP, LimiterMode.LP])
    def test_godunov_limited_local_bounds(self, rng, periodic, mode):
        """Limited antidiffusion over the Godunov flux keeps Burgers values inside the stencil range"""
        topo = face_topology(build_uniform_grid(0.0, 4.0, 40), periodic)
        disc = ConservationDiscretization(topo, burgers_flux(), "godunov")
        cfg = SchemeConfig(dt=0.02, limiter_mode=mode, low_flux="godunov")
        tol = 1e-10 if mode is LimiterMode.AP else 1e-8
        for _ in range(20):
            y = rng.uniform(-1, 1, 40)
            y_min, y_max = topo.stencil_extrema(topo.extend(y))
            y_new, _, _ = explicit_step(disc, y, cfg)
            assert np.all(y_new >= y_min - tol)
            assert np.all(y_new <= y_max + tol)

    @pytest.mark.parametrize("mode", [LimiterMode.AP, LimiterMode.LP, LimiterMode.HIGH, LimiterMode.LOW])
    def test_conservation(self, periodic, mode):
        """Total mass is unchanged on a periodic grid"""
        disc = make_advection(50, 1.0, bc=periodic)
        y = _smooth(50)
        total = _total(disc, y)
        cfg = SchemeConfig(dt=0.01, limiter_mode=mode)
        for _ in range(200):
            y, _, _ = explicit_step(disc, y, cfg)
        assert _total(disc, y) == pytest.approx(total, rel=1e-11)

    def test_constant_field_is_fixed(self, periodic):
        """Nothing moves and every limiter is one"""
        disc = make_advection(10, 1.0, bc=periodic)
        y = np.full(10, 0.4)
        y_new, limiters, report = explicit_step(disc, y, SchemeConfig(dt=0.05))
        np.testing.assert_allclose(y_new, y, atol=1e-15)
        np.testing.assert_array_equal(limiters.alpha_n, 1.0)
        assert report.alpha_min == 1.0

    def test_cfl_violation(self, periodic):
        """Courant number 2 is refused"""
        disc = make_advection(10, 1.0, bc=periodic)
        with pytest.raises(CFLViolationError):
            explicit_step(disc, _smooth(10), SchemeConfig(dt=0.2))

    def test_needs_sigma_zero(self, periodic):
        """Implicit weights go through the Picard loop"""
        disc = make_advection(10, 1.0, bc=periodic)
        with pytest.raises(ValueError):
            explicit_step(disc, _smooth(10), SchemeConfig(dt=0.05, sigma=0.5))


# ============= Picard Steps =============

class TestPicardStep:
    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    def test_constant_field_converges_on_second_iteration(self, periodic, sigma):
        """Unchanged state after the second iteration, the first having no limiter to compare with"""
        disc = make_advection(10, 1.0, bc=periodic)
        y = np.full(10, 2.0)
        y_new, _, report = picard_step(disc, y, SchemeConfig(dt=0.05, sigma=sigma))
        np.testing.assert_allclose(y_new, y, atol=1e-13)
        assert report.picard_iterations == 2

    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    def test_implicit_conservation(self, periodic, sigma):
        """Mass is conserved through the implicit solve"""
        disc = make_advection(50, 1.0, bc=periodic)
        y = _smooth(50)
        total = _total(disc, y)
        cfg = SchemeConfig(dt=0.01, sigma=sigma, limiter_mode=LimiterMode.AP)
        for k in range(20):
            y, _, report = step(disc, y, cfg, step_index=k)
            assert report.picard_iterations >= 1
        assert _total(disc, y) == pytest.approx(total, rel=1e-10)

    def test_divergence_is_reported(self, periodic):
        """A one-iteration cap cannot meet the stop criterion on moving data"""
        disc = make_advection(20, 1.0, bc=periodic)
        cfg = SchemeConfig(dt=0.02, sigma=0.5, picard=PicardParams(max_iters=1))
        with pytest.raises(PicardDivergenceError) as exc:
            picard_step(disc, _smooth(20), cfg, step_index=3)
        assert exc.value.iterations == 1
        assert len(exc.value.residuals) == 3
        assert exc.value.step == 3

    def test_small_cell_judged_against_itself(self, periodic, monkeypatch):
        """A tiny cell that keeps moving by 1e-4 of its own value blocks convergence"""
        real_advance = stepper._advance
        calls = []

        def jittered(*args, **kwargs):
            y, newton = real_advance(*args, **kwargs)
            calls.append(None)
            if len(calls) % 2 == 0:
                y = y.copy()
                y[0] += 1e-7
            return y, newton

        monkeypatch.setattr(stepper, "_advance", jittered)
        disc = make_advection(8, 1.0, u=0.0, bc=periodic)
        y = np.full(8, 2.5)
        y[0] = 1e-3
        cfg = SchemeConfig(dt=0.05, sigma=1.0, limiter_mode=LimiterMode.HIGH, picard=PicardParams(max_iters=6))
        with pytest.raises(PicardDivergenceError) as exc:
            picard_step(disc, y, cfg)
        assert exc.value.iterations == 6
        assert exc.value.residuals[0] > cfg.picard.eps1

    def test_limiter_change_checked_on_every_face(self, periodic, monkeypatch):
        """A limiter flipping on a face without antidiffusion still blocks convergence"""
        real_compute = stepper.compute_limiters
        calls = []

        def flipping(*args, **kwargs):
            result = real_compute(*args, **kwargs)
            calls.append(None)
            alpha_n = result.limiters.alpha_n.copy()
            alpha_n[0] = 0.5 if len(calls) % 2 else 1.0
            return replace(result, limiters=LimiterField(alpha_n, result.limiters.alpha_np1))

        monkeypatch.setattr(stepper, "compute_limiters", flipping)
        disc = make_advection(8, 1.0, bc=periodic)
        cfg = SchemeConfig(dt=0.05, sigma=0.5, limiter_mode=LimiterMode.HIGH, picard=PicardParams(max_iters=5))
        with pytest.raises(PicardDivergenceError) as exc:
            picard_step(disc, np.full(8, 2.0), cfg)
        assert exc.value.residuals[0] < cfg.picard.eps1
        assert exc.value.residuals[1] == pytest.approx(0.5)

    def test_large_step_allowed_when_fully_implicit(self, periodic):
        """sigma = 1 has no CFL bound"""
        disc = make_advection(20, 1.0, bc=periodic)
        y_new, _, _ = step(disc, _smooth(20), SchemeConfig(dt=0.5, sigma=1.0, limiter_mode=LimiterMode.LOW))
        assert np.all(np.isfinite(y_new))


# ============= Nonlinear Implicit Solves =============

class TestNonlinearSolve:
    def test_newton_residual(self, rng, periodic):
        """y + dt D(h^L(y)) = rhs to 1e-11"""
        topo = face_topology(build_uniform_grid(0.0, 1.0, 20), periodic)
        disc = ConservationDiscretization(topo, burgers_flux())
        rhs = rng.uniform(-1, 1, 20)
        dt = 0.025
        y, _ = solve_implicit_nonlinear(disc, rhs, 1.0, dt)
        residual = y + dt * disc.low_divergence(y) - rhs
        assert np.max(np.abs(residual)) <= 1e-11 * max(1.0, np.max(np.abs(rhs)))

    def test_rejects_explicit_weight(self, periodic):
        """sigma = 0 is not an implicit solve"""
        topo = face_topology(build_uniform_grid(0.0, 1.0, 5), periodic)
        disc = ConservationDiscretization(topo, burgers_flux())
        with pytest.raises(ValueError):
            solve_implicit_nonlinear(disc, np.zeros(5), 0.0, 0.1)

    def test_implicit_burgers_step_conserves(self, periodic):
        """sigma = 1/2 AP step on Burgers keeps the total"""
        topo = face_topology(build_uniform_grid(0.0, 1.0, 20), periodic)
        disc = ConservationDiscretization(topo, burgers_flux(), "rusanov")
        y = _smooth(20)
        cfg = SchemeConfig(dt=0.01, sigma=0.5, low_flux="rusanov", limiter_mode=LimiterMode.AP)
        y_new, _, _ = step(disc, y, cfg)
        assert _total(disc, y_new) == pytest.approx(_total(disc, y), rel=1e-10)


# ============= Entropy Steps =============

class TestEntropySteps:
    @staticmethod
    def _riemann(n=40):
        grid = build_uniform_grid(-1.0, 3.0, n)
        disc = ConservationDiscretization(face_topology(grid, BoundarySpec(kind="extend_constant")), quartic_flux())
        return disc, np.where(grid.cell_centers < 1.0, 2.0, -2.0), square_entropy(disc.flux, (-3.0, 3.0))

    def test_le_step_has_no_entropy_production(self):
        """The reported maximum cell residual stays at round-off"""
        disc, y, pair = self._riemann()
        cfg = SchemeConfig(dt=0.005, limiter_mode=LimiterMode.LE, low_flux="rusanov")
        for k in range(3):
            y, limiters, report = step(disc, y, cfg, pair=pair, step_index=k)
            assert report.entropy_residual_max <= 1e-9

    def test_low_order_rusanov_step_is_entropy_stable(self):
        """Reference: alpha = 0 satisfies the cell inequality for a small step"""
        disc, y, pair = self._riemann()
        cfg = SchemeConfig(dt=0.005, limiter_mode=LimiterMode.LOW, low_flux="rusanov")
        y_new, limiters, _ = step(disc, y, cfg, pair=pair)
        residual = cell_entropy_residual(pair, disc.flux, y, y_new, limiters, 0.0, disc.topology, 0.005)
        assert residual.max() <= 1e-12
