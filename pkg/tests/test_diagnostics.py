import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftlab.diagnostics import (FitError, OutOfRegimeWarning, _time_derivative, fit_decay_exponent,
                                  flux_identity_residual, lp_norms, relative_potential, sample,
                                  theoretical_density_rate)
from driftlab.grid import MassGrid
from driftlab.model import (InitialDataSpec, ModelParams, ProfileKind, TransformedState,
                            build_initial_data, build_stationary)
from driftlab.oracles import potential_by_quadrature


class TestRelativePotential:
    P = ModelParams(gamma=2, rho_l=1)

    def test_zero_at_stationary(self):
        assert relative_potential(1.3, 0.7, 0.7, self.P) == 0.0

    def test_compressed(self):
        # int_1^2 (h^2 - 1)/h^2 dh = [h + 1/h]_1^2
        assert relative_potential(1.0, 2.0, 1.0, self.P) == pytest.approx(0.5, rel=1e-15)
        assert potential_by_quadrature(1.0, 2.0, 1.0, self.P) == pytest.approx(0.5, abs=1e-6)

    def test_expanded(self):
        assert relative_potential(1.0, 0.5, 1.0, self.P) == pytest.approx(0.5, rel=1e-15)

    def test_gamma_one_unsupported(self):
        with pytest.raises(ValueError):
            relative_potential(1.0, 2.0, 1.0, ModelParams(gamma=1.0))

    @given(st.floats(1.05, 5), st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.05, 3))
    def test_nonnegative(self, gamma, c, q, q_inf):
        v = relative_potential(c, q, q_inf, ModelParams(gamma=gamma))
        assert v >= -1e-14 * (1 + abs(c) ** gamma * (q**gamma + q_inf**gamma) / min(q, q_inf))
        if abs(q - q_inf) > 1e-3 * q_inf:
            assert v > 0

    @settings(max_examples=30, deadline=None)
    @given(st.floats(1.1, 4), st.floats(0.1, 2), st.floats(0.1, 2), st.floats(-1, 1))
    def test_matches_quadrature(self, gamma, c, q_inf, logr):
        p = ModelParams(gamma=gamma)
        q = q_inf * math.exp(logr)
        if abs(logr) < 1e-3:
            return
        closed = relative_potential(c, q, q_inf, p)
        assert closed == pytest.approx(potential_by_quadrature(c, q, q_inf, p), rel=1e-6)


def stationary_setup(n=64, **kw):
    p = ModelParams(**kw)
    grid = MassGrid(n)
    prof = build_stationary(grid, p)
    s = build_initial_data(InitialDataSpec(profile_kind=ProfileKind.STATIONARY), grid, p)
    return p, grid, prof, s


class TestSample:
    def test_stationary_state(self):
        p, grid, prof, s = stationary_setup()
        r = sample(s, grid, p, prof)
        assert r.E_kin == 0 and r.sup_u == 0 and r.sup_Qux == 0
        assert r.E_pot == pytest.approx(0, abs=1e-15)
        assert r.w_l2 == pytest.approx(0, abs=1e-28) and r.sup_theta_dist == pytest.approx(0, abs=1e-15)
        assert r.Y_min == pytest.approx(1, rel=1e-14) and r.Y_max == pytest.approx(1, rel=1e-14)

    def test_uniform_ratio(self):
        p, grid, prof, s = stationary_setup(theta=0.5)
        s.Q *= 2 ** (1 / p.theta)
        r = sample(s, grid, p, prof)
        assert r.Y_min == pytest.approx(2, rel=1e-14) and r.Y_max == pytest.approx(2, rel=1e-14)

    def test_kinetic_energy_against_direct_quadrature(self):
        p = ModelParams()
        grid = MassGrid(400)
        s = build_initial_data(InitialDataSpec(u_amp=0.05), grid, p)
        r = sample(s, grid, p, build_stationary(grid, p))
        # composite trapezoid of u0^2/2 evaluated from the generator formula
        n, total = 400, 0.0
        for j in range(n + 1):
            x = j / n
            v = 0.5 * (0.05 * math.sin(math.pi * x) * (1 - x)) ** 2
            total += v * (0.5 if j in (0, n) else 1.0) / n
        assert r.E_kin == pytest.approx(total, abs=1e-12)

    @given(st.lists(st.floats(-5, 5), min_size=9, max_size=60))
    def test_holder_chain(self, vals):
        u = np.array(vals)
        grid = MassGrid(len(vals) - 1)
        lp = lp_norms(u, grid)
        tol = 1e-12 * (1 + np.abs(u).max())
        assert lp[2] <= lp[3] + tol <= lp[4] + 2 * tol <= lp[5] + 3 * tol
        assert all(v <= np.abs(u).max() + tol for v in lp.values())


class TestFluxResidual:
    def test_stationary(self):
        p, grid, prof, s = stationary_setup()
        window = []
        for t in (0.0, 0.1, 0.25):
            x = s.copy()
            x.t = t
            window.append(x)
        assert flux_identity_residual(window, grid, p, prof) == pytest.approx(0, abs=1e-14)

    def test_frozen_nonstationary(self):
        p, grid, prof, s = stationary_setup()
        s.Q *= 1.1
        window = []
        for t in (0.0, 0.3, 0.4):
            x = s.copy()
            x.t = t
            window.append(x)
        expected = np.max(np.abs(s.cq**p.gamma - prof.cq_inf**p.gamma))
        assert flux_identity_residual(window, grid, p, prof) == pytest.approx(expected, rel=1e-14)

    def test_uneven_derivative_is_exact_for_quadratics(self):
        times = [0.0, 0.3, 1.0]
        vals = [2 + 3 * t - 4 * t * t for t in times]
        for at in range(3):
            assert _time_derivative(vals, times, at) == pytest.approx(3 - 8 * times[at], abs=1e-13)

    def test_needs_increasing_times(self):
        p, grid, prof, s = stationary_setup()
        with pytest.raises(ValueError):
            flux_identity_residual([s, s, s], grid, p, prof)


class TestFit:
    t = np.linspace(0, 200, 401)

    def test_exact_power_law(self):
        fit = fit_decay_exponent(self.t, (1 + self.t) ** -0.5, (10, 200))
        assert fit.exponent == pytest.approx(-0.5, abs=1e-10) and fit.r2 == pytest.approx(1.0)
        assert fit.window == (10, 200)

    def test_constant(self):
        fit = fit_decay_exponent(self.t, np.full_like(self.t, 4.0))
        assert fit.exponent == pytest.approx(0, abs=1e-12) and fit.prefactor == pytest.approx(4.0)

    def test_sixth(self):
        fit = fit_decay_exponent(self.t, 3 * (1 + self.t) ** (-1 / 6), (10, 200))
        assert fit.exponent == pytest.approx(-1 / 6, abs=1e-12)
        assert fit.prefactor == pytest.approx(3, rel=1e-12)

    @given(st.floats(-3, 0), st.floats(0.1, 10))
    def test_recovers_exponent(self, k, c):
        fit = fit_decay_exponent(self.t, c * (1 + self.t) ** k, (10, 200))
        assert fit.exponent == pytest.approx(k, abs=1e-10)

    def test_rejects_nonpositive(self):
        v = (1 + self.t) ** -1.0
        v[300] = 0.0
        with pytest.raises(FitError):
            fit_decay_exponent(self.t, v, (10, 200))

    def test_rejects_short_window(self):
        with pytest.raises(FitError):
            fit_decay_exponent(self.t, 1 + self.t, (10, 12))


class TestTheoreticalRate:
    @pytest.mark.parametrize("gamma,theta,expected", [(2, 0.5, 1 / 6), (2, 0.9, 0.3), (3, 1.0, 0.2)])
    def test_values(self, gamma, theta, expected):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert theoretical_density_rate(ModelParams(gamma=gamma, theta=theta)) == pytest.approx(expected)

    def test_out_of_strict_regime_warns(self):
        with pytest.warns(OutOfRegimeWarning):
            theoretical_density_rate(ModelParams(gamma=2, theta=1.0))
