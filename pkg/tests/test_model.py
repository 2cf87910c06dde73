import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftlab.grid import MassGrid
from driftlab.model import (GAMMA_NOT_GT_ONE, NONFINITE_PARAMETER, THETA_GT_GAMMA_HALF,
                            THETA_GT_GAMMA_MINUS_1, THETA_GT_ONE_MINUS_ALPHA_GAMMA, DomainError,
                            InitialDataSpec, ModelParams, ParameterError, PhysicalState, ProfileKind,
                            build_initial_data, build_stationary, friction_coefficient,
                            from_transformed, require_valid, stationary_cq, to_transformed,
                            validate_params)


class TestValidate:
    def test_inside_strict_window(self):
        r = validate_params(ModelParams(gamma=2, theta=0.5, alpha=0))
        assert r.ok and r.theorem_regime and r.strict_regime

    def test_theta_equal_gamma_minus_one_is_not_strict(self):
        r = validate_params(ModelParams(gamma=2, theta=1.0, alpha=0))
        assert r.ok and r.theorem_regime and not r.strict_regime

    def test_gamma_one_rejected(self):
        r = validate_params(ModelParams(gamma=1.0, theta=0.5))
        assert GAMMA_NOT_GT_ONE in r.fatal and not r.ok
        with pytest.raises(ParameterError) as e:
            require_valid(ModelParams(gamma=1.0, theta=0.5), force=True)
        assert GAMMA_NOT_GT_ONE in e.value.codes

    def test_theta_above_half_gamma(self):
        assert THETA_GT_GAMMA_HALF in validate_params(ModelParams(gamma=1.5, theta=0.8)).violations

    def test_theta_above_gamma_minus_one(self):
        r = validate_params(ModelParams(gamma=1.5, theta=0.6))
        assert r.violations == (THETA_GT_GAMMA_MINUS_1,)

    def test_theta_above_one_minus_alpha_gamma(self):
        r = validate_params(ModelParams(gamma=2, theta=0.8, alpha=0.2))
        assert r.violations == (THETA_GT_ONE_MINUS_ALPHA_GAMMA,)

    def test_force_allows_window_violation(self):
        p = ModelParams(gamma=2, theta=1.5)
        with pytest.raises(ParameterError):
            require_valid(p)
        assert not require_valid(p, force=True).theorem_regime

    @pytest.mark.parametrize("field", ["gamma", "theta", "rho_l", "A", "B", "g"])
    def test_nonpositive_fields_are_fatal(self, field):
        kwargs = {field: 0.0}
        assert validate_params(ModelParams(**kwargs)).fatal

    def test_nonfinite(self):
        assert validate_params(ModelParams(theta=math.nan)).fatal == (NONFINITE_PARAMETER,)

    @given(st.floats(1.01, 5), st.floats(0.01, 3), st.floats(0, 0.99))
    def test_soundness(self, gamma, theta, alpha):
        alpha = alpha / gamma
        r = validate_params(ModelParams(gamma=gamma, theta=theta, alpha=alpha))
        if r.theorem_regime:
            assert theta <= gamma / 2 and theta <= gamma - 1 and theta <= 1 - alpha * gamma
        if r.strict_regime:
            assert theta < gamma - 1


class TestVariableMaps:
    P = ModelParams(rho_l=1.0)

    def test_half_liquid(self):
        assert to_transformed(PhysicalState(0.2, 0.5), self.P) == pytest.approx((0.4, 1.0), abs=0)

    def test_quarter_liquid(self):
        c, Q = to_transformed(PhysicalState(0.25, 0.25), self.P)
        assert c == 1.0 and Q == pytest.approx(1 / 3, rel=1e-15)

    def test_full_liquid_rejected(self):
        with pytest.raises(DomainError):
            to_transformed(PhysicalState(0.1, 1.0), self.P)

    def test_zero_liquid_rejected(self):
        with pytest.raises(DomainError):
            to_transformed(PhysicalState(0.1, 0.0), self.P)

    def test_inverse_examples(self):
        assert from_transformed(0.4, 1.0, self.P) == pytest.approx((0.2, 0.5), abs=1e-16)
        assert from_transformed(1.0, 1 / 3, self.P) == pytest.approx((0.25, 0.25), rel=1e-15)
        assert from_transformed(0.0, 1.0, self.P) == (0.0, 0.5)

    def test_inverse_rejects_nonpositive_q(self):
        with pytest.raises(DomainError):
            from_transformed(1.0, 0.0, self.P)

    @given(st.floats(0.1, 10), st.floats(0, 5), st.floats(0.001, 0.999))
    def test_round_trip(self, rho_l, n, frac):
        p = ModelParams(rho_l=rho_l)
        m = frac * rho_l
        n2, m2 = from_transformed(*to_transformed(PhysicalState(n, m), p), p)
        assert abs(m2 - m) <= 2 * np.spacing(m)
        assert abs(n2 - n) <= 2 * np.spacing(n) + 1e-300


class TestFriction:
    def test_values(self):
        p = ModelParams(f=1.0, rho_l=1.0)
        assert friction_coefficient(0.0, p) == 0.0
        assert friction_coefficient(1.0, p) == 0.25
        assert friction_coefficient(1e12, p) == pytest.approx(1.0, rel=1e-11)

    @given(st.floats(0, 1e8), st.floats(0, 10), st.floats(0.1, 10))
    def test_bounded_and_monotone(self, q, f, rho_l):
        p = ModelParams(f=f, rho_l=rho_l)
        h = friction_coefficient(q, p)
        assert 0 <= h <= f * rho_l**2 * (1 + 1e-15)
        assert friction_coefficient(q * 1.5 + 1e-3, p) >= h


class TestStationary:
    def test_values(self):
        p = ModelParams(gamma=2, g=1)
        assert stationary_cq(0.0, p) == 0.0
        assert stationary_cq(1.0, p) == 1.0
        assert stationary_cq(0.25, p) == 0.5

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            stationary_cq(1.5, ModelParams())

    @given(st.floats(1.01, 5), st.floats(0.1, 10))
    def test_strictly_increasing(self, gamma, g):
        x = np.linspace(0, 1, 257)
        assert np.all(np.diff(stationary_cq(x, ModelParams(gamma=gamma, g=g))) > 0)

    def test_pressure_slope_is_g(self):
        p = ModelParams(gamma=3.0, g=2.5)
        grid = MassGrid(64)
        prof = build_stationary(grid, p)
        slope = np.diff(prof.cq_inf**p.gamma) / grid.dx
        np.testing.assert_allclose(slope, p.g, rtol=1e-12)

    def test_first_cell_shrinks_with_dx(self):
        p = ModelParams()
        firsts = [build_stationary(MassGrid(n), p).cq_inf[0] for n in (16, 64, 256, 1024)]
        assert all(a > b for a, b in zip(firsts, firsts[1:]))


class TestInitialData:
    def test_stationary_start_from_unit_envelope(self):
        p = ModelParams(gamma=2, g=1, alpha=0)
        grid = MassGrid(50)
        s = build_initial_data(InitialDataSpec(kappa_lo=1, kappa_hi=1, c_amp=1, perturb_wavenumber=5), grid, p)
        np.testing.assert_allclose(s.cq, build_stationary(grid, p).cq_inf, rtol=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 0.2, 0.45])
    def test_envelope(self, alpha):
        p = ModelParams(gamma=2, alpha=alpha, theta=0.1)
        grid = MassGrid(200)
        s = build_initial_data(InitialDataSpec(kappa_lo=0.8, kappa_hi=1.2, c_amp=0.7), grid, p)
        ratio = s.cq / grid.cell_centers ** (1 / p.gamma)
        assert ratio.min() >= 0.8 * (1 - 4e-16) and ratio.max() <= 1.2 * (1 + 4e-16)
        np.testing.assert_allclose(s.c, 0.7 * grid.cell_centers**alpha, rtol=1e-15)

    def test_velocity(self):
        grid = MassGrid(40)
        s = build_initial_data(InitialDataSpec(u_amp=0.0), grid, ModelParams())
        assert not s.u.any()
        s = build_initial_data(InitialDataSpec(u_amp=0.05), grid, ModelParams())
        assert s.u[-1] == 0.0 and np.abs(s.u).max() <= 0.05

    def test_stationary_kind(self):
        p = ModelParams(g=3.0, A=2.0)
        grid = MassGrid(32)
        s = build_initial_data(InitialDataSpec(profile_kind=ProfileKind.STATIONARY), grid, p)
        np.testing.assert_allclose(s.cq, build_stationary(grid, p).cq_inf, rtol=1e-15)
        assert not s.u.any()

    def test_rejects_nonpositive_envelope(self):
        with pytest.raises(ParameterError):
            build_initial_data(InitialDataSpec(kappa_lo=0.0), MassGrid(16), ModelParams())

    def test_c_is_read_only(self):
        s = build_initial_data(InitialDataSpec(), MassGrid(16), ModelParams())
        with pytest.raises(ValueError):
            s.c[0] = 1.0

    def test_default_smallness(self):
        # velocity energy is small; the weighted distance matches its closed form
        # 0.04 * int_0^1 x^(1/2) sin^2(4 pi x) dx, which sits just above 1e-2
        p = ModelParams()
        grid = MassGrid(400)
        s = build_initial_data(InitialDataSpec(), grid, p)
        prof = build_stationary(grid, p)
        u_l2 = np.sum(grid.node_weights * s.u**2)
        wdist = np.sum(prof.w_l2 * (s.cq - prof.cq_inf) ** 2) * grid.dx
        x = (np.arange(200000) + 0.5) / 200000
        exact = 0.04 * np.mean(np.sqrt(x) * np.sin(4 * np.pi * x) ** 2)
        assert u_l2 < 1e-2
        assert wdist == pytest.approx(exact, rel=1e-3)
