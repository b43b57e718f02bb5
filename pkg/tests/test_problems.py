import math

import numpy as np
import pytest

from fctlp.errors import UnknownProblemError
from fctlp.grid import build_uniform_grid
from fctlp.problems import (
    EXACT_MAXIMA,
    PUBLISHED_TABLES,
    apply_overrides,
    build_discretization,
    burgers_exact,
    burgers_shock_position,
    convection_diffusion_series,
    entropy_integral,
    godunov_reference,
    initial_field,
    l1_error,
    make_problem,
    problem_entropy,
    problem_grid,
    reference_solution,
    refined_crank_nicolson,
    segment_centers,
    segment_metrics,
)
from fctlp.operators import ConservationDiscretization, LinearDiscretization
from fctlp.schemas import PROBLEM_NAMES, ProblemSpec, SchemeConfig


# ============= Registry =============

class TestRegistry:
    @pytest.mark.parametrize("name", PROBLEM_NAMES)
    def test_every_problem_builds(self, name):
        """Grid, initial field and discretization for each registered problem"""
        problem = make_problem(name)
        grid, bc = problem_grid(problem)
        field = initial_field(problem, grid)
        assert len(field.values) == grid.n_cells
        low = "rusanov" if problem.conservation_law else "upwind"
        disc = build_discretization(problem, SchemeConfig(dt=problem.dt, low_flux=low), grid, bc)
        expected = ConservationDiscretization if problem.conservation_law else LinearDiscretization
        assert isinstance(disc, expected)

    def test_unknown_problem(self):
        """Names outside the registry are rejected"""
        with pytest.raises(UnknownProblemError):
            make_problem("shallow-water")

    def test_json_round_trip(self):
        """Specs survive serialization unchanged"""
        problem = make_problem("solid-body-rotation")
        assert ProblemSpec.model_validate_json(problem.model_dump_json()) == problem

    def test_advection_defaults(self):
        """400 cells on [0, 4], dt = 0.002, output at 0.8"""
        problem = make_problem("advection-shapes")
        assert problem.cells == [400]
        assert problem.dt == 0.002
        assert problem.end_times == [0.8]
        assert [s.name for s in problem.segments] == ["square", "sine-squared", "semi-ellipse", "gaussian", "triangle"]

    def test_overrides(self):
        """Cells, dt and end time replace the defaults"""
        problem = apply_overrides(make_problem("burgers"), cells=100, dt=0.01, t_end=2.0)
        assert problem.cells == [100]
        assert problem.dt == 0.01
        assert problem.end_times == [1.0, 2.0]

    def test_overrides_2d_cells(self):
        """A single cell count applies to both axes"""
        problem = apply_overrides(make_problem("solid-body-rotation"), cells=32)
        assert problem.cells == [32, 32]

    def test_no_overrides_is_identity(self):
        """The same object comes back"""
        problem = make_problem("burgers")
        assert apply_overrides(problem) is problem

    def test_entropy_table_covers_data(self):
        """Buckley-Leverett entropy flux is tabulated past the Riemann states"""
        problem = make_problem("buckley-leverett")
        pair = problem_entropy(problem)
        assert np.isfinite(pair.F(np.array([-3.0, 3.0]))).all()


# ============= Initial Profiles =============

class TestInitialProfiles:
    def test_advection_shapes(self):
        """Square plateau, zero gaps and the triangle apex"""
        problem = make_problem("advection-shapes")
        grid, _ = problem_grid(problem)
        y = initial_field(problem, grid).values
        x = grid.cell_centers
        np.testing.assert_array_equal(y[(x > 0.05) & (x < 0.25)], 1.0)
        assert np.all(y[(x > 0.3) & (x < 0.8)] == 0.0)
        assert y.max() <= 1.0
        assert np.all(y >= 0.0)

    def test_rotating_bodies(self):
        """Slot empty, cylinder full, cone and hump peaks"""
        problem = apply_overrides(make_problem("solid-body-rotation"), cells=100)
        grid, _ = problem_grid(problem)
        y = initial_field(problem, grid).values.reshape(grid.shape)
        xc, yc = grid.x.cell_centers, grid.y.cell_centers

        def at(px, py):
            return y[np.argmin(np.abs(yc - py)), np.argmin(np.abs(xc - px))]

        assert at(0.5, 0.7) == 0.0
        assert at(0.4, 0.75) == 1.0
        assert at(0.25, 0.5) == pytest.approx(1.0, abs=0.1)
        assert at(0.5, 0.25) == pytest.approx(0.5, abs=0.02)
        assert y.max() == 1.0

    def test_riemann(self):
        """Left and right states around the split"""
        problem = make_problem("nonconvex-riemann")
        grid, _ = problem_grid(problem)
        y = initial_field(problem, grid).values
        assert set(np.unique(y)) == {-2.0, 2.0}
        assert np.all(y[grid.cell_centers < 1.0] == 2.0)

    def test_sine_pulse(self):
        """Peak 2 at x = 0.4"""
        problem = make_problem("convection-diffusion")
        grid = build_uniform_grid(0.0, 1.0, 1000)
        y = initial_field(problem, grid).values
        assert y.max() == pytest.approx(2.0, abs=1e-4)
        assert grid.cell_centers[np.argmax(y)] == pytest.approx(0.4, abs=1e-3)


# ============= Reference Solutions =============

class TestBurgersExact:
    def test_shock_positions(self):
        """1.5 at t = 1, 2 at t = 2, sqrt(6) at t = 3"""
        assert burgers_shock_position(1.0) == pytest.approx(1.5)
        assert burgers_shock_position(2.0) == pytest.approx(2.0)
        assert burgers_shock_position(3.0) == pytest.approx(math.sqrt(6.0))

    def test_profile_at_one(self):
        """Rarefaction x on [0, 1], plateau up to the shock"""
        x = np.array([-0.1, 0.5, 1.2, 1.49, 1.51])
        np.testing.assert_allclose(burgers_exact(x, 1.0), [0.0, 0.5, 1.0, 1.0, 0.0])

    def test_profile_after_interaction(self):
        """x / t behind the shock at t = 3"""
        x = np.array([1.5, 2.4, 2.5])
        np.testing.assert_allclose(burgers_exact(x, 3.0), [0.5, 0.8, 0.0])

    def test_mass_is_one(self):
        """Integral of the box is conserved"""
        grid = build_uniform_grid(-0.5, 3.5, 40000)
        for t in (0.0, 1.0, 3.0):
            assert np.sum(grid.cell_sizes * burgers_exact(grid.cell_centers, t)) == pytest.approx(1.0, abs=1e-3)


class TestConvectionDiffusionSeries:
    @pytest.mark.parametrize("t", [1.0, 2.0, 3.0])
    def test_published_maxima(self, t):
        """Peak of the exact solution"""
        x = np.linspace(0.0, 1.0, 2001)
        assert convection_diffusion_series(x, t).max() == pytest.approx(EXACT_MAXIMA[t], abs=5e-3)

    def test_boundary_values_vanish(self):
        """Zero Dirichlet data at both ends"""
        np.testing.assert_allclose(convection_diffusion_series(np.array([0.0, 1.0]), 1.0), 0.0, atol=1e-9)

    @pytest.mark.slow
    def test_crank_nicolson_reference_agrees(self):
        """The refined unlimited solution is close to the series"""
        problem = make_problem("convection-diffusion")
        grid, _ = problem_grid(problem)
        cn = refined_crank_nicolson(problem, 1.0)
        exact = convection_diffusion_series(grid.cell_centers, 1.0)
        assert l1_error(cn, exact, grid) < 2e-3


class TestGodunovReference:
    def test_burgers_against_exact(self):
        """Coarse Godunov reference lands near the exact solution"""
        problem = apply_overrides(make_problem("burgers"), cells=100, dt=0.01)
        grid, _ = problem_grid(problem)
        ref = godunov_reference(problem, 1.0, refine=4)
        exact = burgers_exact(grid.cell_centers, 1.0)
        assert l1_error(ref, exact, grid) < 0.05

    def test_rejects_linear_problem(self):
        """Only conservation laws"""
        with pytest.raises(ValueError):
            godunov_reference(make_problem("advection-shapes"), 0.8)

    def test_time_must_match_steps(self):
        """Output times are multiples of dt"""
        problem = apply_overrides(make_problem("burgers"), cells=20, dt=0.01)
        with pytest.raises(ValueError):
            godunov_reference(problem, 0.0137, refine=1)


class TestTranslationAndRotation:
    def test_full_period(self):
        """After one period the profile returns"""
        problem = make_problem("advection-shapes")
        grid, _ = problem_grid(problem)
        start = initial_field(problem, grid).values
        np.testing.assert_allclose(reference_solution(problem, 4.0).values, start, atol=1e-12)

    def test_full_revolution(self):
        """After one revolution the bodies return exactly"""
        problem = apply_overrides(make_problem("solid-body-rotation"), cells=64)
        grid, _ = problem_grid(problem)
        start = initial_field(problem, grid).values
        np.testing.assert_array_equal(reference_solution(problem, 1.0).values, start)

    def test_segment_centers_move(self):
        """Centers follow the translation modulo the period"""
        problem = make_problem("advection-shapes")
        centers = segment_centers(problem, 0.8)
        assert centers["square"][0] == pytest.approx(0.95)
        assert centers["triangle"][0] == pytest.approx(0.2)

    def test_rotation_centers(self):
        """A quarter turn moves the cone to the bottom"""
        centers = segment_centers(make_problem("solid-body-rotation"), 0.25)
        np.testing.assert_allclose(centers["cone"], [0.5, 0.25], atol=1e-12)

    def test_negative_time(self):
        """Reference times are non-negative"""
        with pytest.raises(ValueError):
            reference_solution(make_problem("burgers"), -1.0)


# ============= Metrics =============

class TestMetrics:
    def test_l1_error(self):
        """Unit difference in one cell of width 0.01"""
        grid = build_uniform_grid(0.0, 4.0, 400)
        a = np.zeros(400)
        b = a.copy()
        b[10] = 1.0
        assert l1_error(a, a, grid) == 0.0
        assert l1_error(a, b, grid) == pytest.approx(0.01)

    def test_l1_error_shape_mismatch(self):
        """Sizes must agree"""
        with pytest.raises(ValueError):
            l1_error(np.zeros(3), np.zeros(4), build_uniform_grid(0.0, 1.0, 3))

    def test_entropy_integral(self):
        """Zero field gives 0; constant 2 on [0, 2] gives 4"""
        problem = make_problem("burgers")
        pair = problem_entropy(problem)
        grid = build_uniform_grid(0.0, 2.0, 20)
        assert entropy_integral(np.zeros(20), grid, pair) == 0.0
        assert entropy_integral(np.full(20, 2.0), grid, pair) == pytest.approx(4.0)

    def test_entropy_integral_range(self):
        """Half the domain, half the integral"""
        pair = problem_entropy(make_problem("burgers"))
        grid = build_uniform_grid(0.0, 2.0, 20)
        assert entropy_integral(np.full(20, 2.0), grid, pair, (0.0, 1.0)) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            entropy_integral(np.zeros(20), grid, pair, (-1.0, 1.0))

    def test_segment_metrics_partition(self):
        """Segment errors add up to the total"""
        problem = make_problem("advection-shapes")
        grid, _ = problem_grid(problem)
        ref = reference_solution(problem, 0.8).values
        values = np.roll(ref, 3)
        segs = segment_metrics(values, ref, grid, segment_centers(problem, 0.8), period=4.0)
        assert set(segs) == {"square", "sine-squared", "semi-ellipse", "gaussian", "triangle"}
        assert sum(s.l1_error for s in segs.values()) == pytest.approx(l1_error(values, ref, grid))
        assert segs["square"].y_max == 1.0


# ============= Published Values =============

class TestPublishedValues:
    def test_table_shapes(self):
        """Five shapes, three bodies and three output times, each with three weights"""
        assert len(PUBLISHED_TABLES["table1"]) == 15
        assert len(PUBLISHED_TABLES["table2"]) == 15
        assert len(PUBLISHED_TABLES["table3"]) == 9
        assert len(PUBLISHED_TABLES["table4"]) == 9
        assert len(PUBLISHED_TABLES["table5"]) == 9

    def test_entries_have_both_modes(self):
        """LP and AP for every entry"""
        for table in PUBLISHED_TABLES.values():
            for entry in table.values():
                assert set(entry) == {"LP", "AP"}
