import math

import numpy as np
import pytest

from fctlp.fluxes import (
    buckley_leverett_flux,
    burgers_flux,
    centered_flux,
    constant_velocity,
    diffusive_flux,
    flux_partials,
    godunov_flux,
    interval_max_abs_deriv,
    linear_flux,
    make_flux,
    quartic_flux,
    quick_antidiffusive_flux,
    quick_flux,
    rotation_velocity,
    rusanov_flux,
    upwind_flux,
)


def _sampled_max_abs_deriv(flux, a, b, n=20001):
    s = np.linspace(min(a, b), max(a, b), n)
    return float(np.abs(flux.deriv(s)).max())


# ============= Linear Fluxes =============

class TestLinearFluxes:
    @pytest.mark.parametrize("u, expected", [(1.0, 1.0), (-1.0, -2.0), (0.0, 0.0)])
    def test_upwind_picks_the_upstream_state(self, u, expected):
        """u=1 takes y_left, u=-1 takes -y_right"""
        assert upwind_flux(u, 1.0, 2.0) == pytest.approx(expected)

    def test_centered_average(self):
        """u (a + b) / 2"""
        assert centered_flux(2.0, 1.0, 2.0) == pytest.approx(3.0)

    def test_quick_of_linear_data(self):
        """Quadratic interpolation is exact for linear profiles"""
        assert quick_flux(1.0, 0.0, 1.0, 2.0, 3.0) == pytest.approx(1.5)

    def test_quick_minus_upwind(self):
        """(0, 1, 1, 1) with u = 1 gives h^d = 1/8"""
        assert quick_flux(1.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(1.125)
        assert quick_antidiffusive_flux(1.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(0.125)

    @pytest.mark.parametrize("u", [1.3, -0.7])
    def test_quick_antidiffusive_is_difference(self, rng, u):
        """h^d = QUICK - upwind for either sign of u"""
        y = rng.normal(size=(4, 50))
        np.testing.assert_allclose(
            quick_antidiffusive_flux(u, *y), quick_flux(u, *y) - upwind_flux(u, y[1], y[2]), atol=1e-14)

    def test_diffusive_flux(self):
        """k (b - a) / dx"""
        assert diffusive_flux(0.5, 1.0, 3.0, 0.5) == pytest.approx(2.0)

    def test_diffusive_flux_rejects_zero_spacing(self):
        """Spacing must be positive"""
        with pytest.raises(ValueError):
            diffusive_flux(1.0, 0.0, 1.0, 0.0)


class TestVelocityFields:
    def test_constant_velocity_per_axis(self):
        """Each axis reads its own component"""
        field = constant_velocity(1.0, -2.0)
        coords = np.zeros((4, 2))
        u = field.sample(coords, np.array([0, 1, 0, 1]), 0.0)
        np.testing.assert_array_equal(u, [1.0, -2.0, 1.0, -2.0])

    def test_rotation_is_counterclockwise(self):
        """Above the center the first component points to negative x"""
        field = rotation_velocity((0.5, 0.5))
        coords = np.array([[0.5, 0.75], [0.75, 0.5]])
        u = field.sample(coords, np.array([0, 1]), 0.0)
        assert u[0] == pytest.approx(-2 * math.pi * 0.25)
        assert u[1] == pytest.approx(2 * math.pi * 0.25)


# ============= Nonlinear Fluxes =============

class TestFluxFunctions:
    def test_quartic_values(self):
        """f(0) = 1, f(1) = 0, f'(1) = -1.5"""
        f = quartic_flux()
        assert f.eval(np.float64(0.0)) == pytest.approx(1.0)
        assert f.eval(np.float64(1.0)) == pytest.approx(0.0)
        assert f.deriv(np.float64(1.0)) == pytest.approx(-1.5)

    def test_quartic_is_not_convex(self):
        """f'' changes sign at +/- sqrt(5/6)"""
        f = quartic_flux()
        assert not f.is_convex
        r = math.sqrt(5.0 / 6.0)
        for c in (-r, r):
            assert f.second_deriv(np.float64(c)) == pytest.approx(0.0, abs=1e-12)

    def test_buckley_leverett_values(self):
        """f(0) = 0, f(1) = 1 and f(1/2) = 4/5"""
        f = buckley_leverett_flux()
        assert f.eval(np.float64(1.0)) == pytest.approx(1.0)
        assert f.eval(np.float64(0.0)) == pytest.approx(0.0)
        assert f.eval(np.float64(0.5)) == pytest.approx(1.0 / 1.25)

    def test_buckley_leverett_critical_points(self):
        """Three stationary points of f' on [-3, 3]"""
        crit = buckley_leverett_flux().deriv_critical_points
        assert len(crit) == 3
        assert -0.5 < crit[0] < 0.0
        assert 0.0 < crit[1] < 0.5
        assert 1.0 < crit[2] < 1.5

    def test_make_flux_rejects_unknown(self):
        """Only registered fluxes"""
        with pytest.raises(ValueError):
            make_flux("cubic")


class TestIntervalMaxAbsDeriv:
    def test_burgers_endpoints(self):
        """Convex flux: the max sits at an endpoint"""
        assert interval_max_abs_deriv(burgers_flux(), -1.0, 2.0) == pytest.approx(2.0)

    def test_quartic_interior_extremum(self):
        """[-1, 1] contains the critical points of f'"""
        f = quartic_flux()
        r = math.sqrt(5.0 / 6.0)
        expected = max(1.5, abs(r ** 3 - 2.5 * r))
        assert interval_max_abs_deriv(f, -1.0, 1.0) == pytest.approx(expected)

    @pytest.mark.parametrize("make", [quartic_flux, buckley_leverett_flux, burgers_flux])
    def test_matches_dense_sampling(self, rng, make):
        """Within the sampling error of a 20001-point scan"""
        f = make()
        for a, b in rng.uniform(-2.5, 2.5, size=(30, 2)):
            exact = float(interval_max_abs_deriv(f, a, b))
            sampled = _sampled_max_abs_deriv(f, a, b)
            assert exact >= sampled - 1e-12
            assert exact == pytest.approx(sampled, rel=1e-5, abs=1e-8)


class TestRiemannFluxes:
    def test_rusanov_burgers(self):
        """h(0, 1) = 0.5 (0 + 0.5) - 0.5 * 1 * 1 = -0.25"""
        assert rusanov_flux(burgers_flux(), 0.0, 1.0) == pytest.approx(-0.25)

    def test_godunov_burgers_rarefaction_through_sonic_point(self):
        """min over [-1, 1] of y^2 / 2 is 0"""
        assert godunov_flux(burgers_flux(), -1.0, 1.0) == pytest.approx(0.0)

    def test_godunov_burgers_shock(self):
        """max over [-1, 2] for a > b"""
        assert godunov_flux(burgers_flux(), 2.0, -1.0) == pytest.approx(2.0)

    @pytest.mark.parametrize("make", [quartic_flux, buckley_leverett_flux])
    def test_godunov_matches_sampled_extremum(self, rng, make):
        """Exact extremum over the interval"""
        f = make()
        for a, b in rng.uniform(-2.0, 2.0, size=(20, 2)):
            s = np.linspace(min(a, b), max(a, b), 200001)
            vals = f.eval(s)
            expected = vals.min() if a <= b else vals.max()
            h = float(godunov_flux(f, a, b))
            assert h == pytest.approx(expected, abs=1e-6)
            if a <= b:
                assert h <= vals.min() + 1e-12
            else:
                assert h >= vals.max() - 1e-12

    @pytest.mark.parametrize("make", [quartic_flux, burgers_flux, buckley_leverett_flux, lambda: linear_flux(-0.8)])
    @pytest.mark.parametrize("kind", ["rusanov", "godunov"])
    def test_consistency(self, rng, make, kind):
        """h(a, a) = f(a)"""
        f = make()
        a = rng.uniform(-2.0, 2.0, size=40)
        h = rusanov_flux(f, a, a) if kind == "rusanov" else godunov_flux(f, a, a)
        np.testing.assert_allclose(h, f.eval(a), atol=1e-12)

    @pytest.mark.parametrize("make", [quartic_flux, burgers_flux, buckley_leverett_flux])
    @pytest.mark.parametrize("kind", ["rusanov", "godunov"])
    def test_monotone_partials(self, rng, make, kind):
        """Nondecreasing in the left state, nonincreasing in the right"""
        f = make()
        a, b = rng.uniform(-2.0, 2.0, size=(2, 200))
        d_left, d_right = flux_partials(kind, f, a, b)
        assert np.all(d_left >= -1e-12)
        assert np.all(d_right <= 1e-12)

    def test_partials_reject_unknown_kind(self):
        """Only the monotone fluxes have partials"""
        with pytest.raises(ValueError):
            flux_partials("centered", burgers_flux(), 0.0, 1.0)
