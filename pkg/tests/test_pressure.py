"""Pressure curves, tilts, rate functions, and the lattice probe."""

from __future__ import annotations

import math

import numpy as np
import pytest

from ruellekit import (
    LatticeDegenerate,
    OutOfRange,
    PressureCurve,
    beta,
    beta_prime,
    center_and_normalize,
    lattice_check,
    pressure_flow,
    pressure_sigma,
    rate_J,
    rate_J_infimum,
    solve_xi,
    variance_flow,
)
from ruellekit.potential import combine
from ruellekit.transfer import build_operator, leading_eigendata

from .conftest import PHI, depth1


class TestPressureSigma:
    def test_zero_potential_full_shifts(self, full2, full3):
        assert pressure_sigma(depth1(full2, [0.0, 0.0])) == pytest.approx(
            math.log(2.0), abs=1e-12
        )
        assert pressure_sigma(depth1(full3, [0.0, 0.0, 0.0])) == pytest.approx(
            math.log(3.0), abs=1e-12
        )

    def test_constant_shifts_pressure(self, full2):
        c = -0.37
        assert pressure_sigma(depth1(full2, [c, c])) == pytest.approx(
            math.log(2.0) + c, abs=1e-12
        )

    def test_golden_mean(self, golden):
        assert pressure_sigma(depth1(golden, [0.0, 0.0])) == pytest.approx(
            math.log(PHI), abs=1e-12
        )

    def test_complex_rejected(self, full2):
        phi = depth1(full2, [0.0, 0.0]) + 1j * depth1(full2, [1.0, 0.0])
        with pytest.raises(ValueError):
            pressure_sigma(phi)


class TestPressureFlow:
    def test_unit_roof(self, full2):
        zero = depth1(full2, [0.0, 0.0])
        tau = depth1(full2, [1.0, 1.0], "roof")
        assert pressure_flow(zero, tau, zero) == pytest.approx(math.log(2.0), abs=1e-10)

    def test_constant_roof_scales(self, full2):
        zero = depth1(full2, [0.0, 0.0])
        c = 2.5
        tau = depth1(full2, [c, c], "roof")
        assert pressure_flow(zero, tau, zero) == pytest.approx(
            math.log(2.0) / c, abs=1e-10
        )

    def test_two_level_roof_root(self, full2):
        # e^{-s} + e^{-2s} = 1 has the golden-ratio log as its root
        zero = depth1(full2, [0.0, 0.0])
        tau = depth1(full2, [1.0, 2.0], "roof")
        s = pressure_flow(zero, tau, zero)
        assert s == pytest.approx(math.log(PHI), abs=1e-10)
        assert math.exp(-s) + math.exp(-2 * s) == pytest.approx(1.0, abs=1e-10)

    def test_root_has_zero_shift_pressure(self, desk):
        f0, tau, g = desk
        s = pressure_flow(f0, tau, g, t=0.8)
        assert pressure_sigma(combine(f0, tau, g, s=s, z=0.8)) == pytest.approx(
            0.0, abs=1e-10
        )

    def test_nonpositive_roof_rejected(self, full2):
        zero = depth1(full2, [0.0, 0.0])
        bad = depth1(full2, [1.0, 0.0], "roof")
        with pytest.raises(ValueError):
            pressure_flow(zero, bad, zero)

    def test_monotone_decreasing_in_s(self, desk):
        f0, tau, g = desk
        values = [pressure_sigma(combine(f0, tau, g, s=s)) for s in (-1.0, -0.3, 0.0, 0.4, 1.2)]
        assert all(values[i] > values[i + 1] for i in range(len(values) - 1))
        # slope is at least min(tau) in magnitude
        assert values[0] - values[1] >= 0.7 * float(tau.values.min())


class TestPressureCurveDerivatives:
    def test_beta_prime_matches_finite_differences(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        rng = np.random.default_rng(7)
        h = 1e-4
        for t in rng.uniform(-2.0, 2.0, 5):
            t = float(t)
            fd = (beta(curve, t + h) - beta(curve, t - h)) / (2.0 * h)
            assert beta_prime(curve, t) == pytest.approx(fd, abs=1e-5)

    def test_proportional_observable_constant_slope(self, full2):
        f0 = depth1(full2, [-math.log(2.0)] * 2)
        tau = depth1(full2, [1.0, 1.3], "roof")
        kappa = 0.4
        curve = PressureCurve(f0, tau, kappa * tau)
        for t in (-1.0, 0.0, 2.0):
            assert beta_prime(curve, t) == pytest.approx(kappa, abs=1e-10)
        assert variance_flow(curve, 0.0) == pytest.approx(0.0, abs=1e-8)

    def test_swap_symmetric_system(self, full2):
        # f, tau symmetric under 0 <-> 1 at t = 0: the Gibbs state is
        # uniform, so beta' is the plain average of g over tau
        f = depth1(full2, [0.0, 0.0])
        tau = depth1(full2, [1.2, 1.2], "roof")
        g = depth1(full2, [0.3, 0.9])
        curve = PressureCurve(f, tau, g)
        assert beta_prime(curve, 0.0) == pytest.approx(
            (0.3 + 0.9) / (1.2 + 1.2), abs=1e-10
        )

    def test_convexity_on_cached_points(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        for t in np.linspace(-3.0, 3.0, 13):
            beta(curve, float(t))
        assert curve.convexity_defect() >= -1e-9

    def test_variance_positive_off_degenerate(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        assert variance_flow(curve, 0.0) > 0.01


class TestSolveXi:
    def test_center_gives_zero_tilt(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        a0 = beta_prime(curve, 0.0)
        assert solve_xi(curve, a0) == pytest.approx(0.0, abs=1e-8)

    def test_out_of_range(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        with pytest.raises(OutOfRange):
            solve_xi(curve, 5.0)

    def test_proportional_observable_degenerate(self, full2):
        f0 = depth1(full2, [-math.log(2.0)] * 2)
        tau = depth1(full2, [1.0, 1.3], "roof")
        curve = PressureCurve(f0, tau, 0.4 * tau)
        with pytest.raises(OutOfRange):
            solve_xi(curve, 0.7)
        with pytest.raises(LatticeDegenerate):
            solve_xi(curve, 0.4)

    def test_residual_below_tolerance(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        for a in (0.4, 0.7):
            xi = solve_xi(curve, a)
            assert abs(beta_prime(curve, xi) - a) <= 1e-8

    def test_inverse_function_derivative(self, desk):
        # xi'(a) * beta''(xi(a)) = 1
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        h = 1e-4
        for a in (0.5, 0.7):
            xi = solve_xi(curve, a)
            xi_prime = (solve_xi(curve, a + h) - solve_xi(curve, a - h)) / (2.0 * h)
            assert xi_prime * variance_flow(curve, xi) == pytest.approx(1.0, abs=1e-3)


class TestRateReport:
    def test_center_has_zero_rate(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        a_star = beta_prime(curve, 0.0)
        rr = rate_J(f0, tau, g, a_star)
        assert rr.xi == pytest.approx(0.0, abs=1e-8)
        assert rr.J == pytest.approx(0.0, abs=1e-10)
        assert rr.gamma == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("a", [0.4, 0.55, 0.7, 0.8])
    def test_report_identities(self, desk, a):
        f0, tau, g = desk
        rr = rate_J(f0, tau, g, a)
        assert rr.J <= 1e-12
        assert rr.omega > 0.0
        assert rr.mean_tau >= float(tau.values.min()) - 1e-12
        assert abs(rr.J - rr.gamma * rr.mean_tau) <= 1e-10
        assert rr.diagnostics["xi_residual"] <= 1e-8

    def test_tilted_state_centers_the_observable(self, desk):
        # the Gibbs state reported through mean_tau averages g - a tau to 0
        f0, tau, g = desk
        a = 0.7
        rr = rate_J(f0, tau, g, a)
        from ruellekit.pressure import _gibbs_at
        from ruellekit.transfer import expectation

        curve = PressureCurve(
            combine(f0, tau, g, s=rr.pressure_shift), tau, g
        )
        mu = _gibbs_at(curve, rr.xi)
        assert expectation(mu, g - a * tau) == pytest.approx(0.0, abs=1e-9)
        assert expectation(mu, tau) == pytest.approx(rr.mean_tau, abs=1e-10)

    def test_infimum_route_agrees(self, desk):
        f0, tau, g = desk
        for a in (0.5, 0.7):
            rr = rate_J(f0, tau, g, a)
            assert rate_J_infimum(f0, tau, g, a) == pytest.approx(rr.J, abs=1e-9)

    def test_infimum_below_sampled_pressures(self, desk):
        f0, tau, g = desk
        a = 0.7
        rr = rate_J(f0, tau, g, a)
        f_c = combine(f0, tau, g, s=rr.pressure_shift)
        g_a = g - a * tau
        for t in np.linspace(rr.xi - 1.5, rr.xi + 1.5, 11):
            assert pressure_sigma(combine(f_c, tau, g_a, z=float(t))) >= rr.J - 1e-12

    def test_sigma_tilt_convexity(self, desk):
        f0, tau, g = desk
        a = 0.7
        rr = rate_J(f0, tau, g, a)
        f_c = combine(f0, tau, g, s=rr.pressure_shift)
        g_a = g - a * tau
        ts = np.linspace(rr.xi - 2.0, rr.xi + 2.0, 9)
        vals = [pressure_sigma(combine(f_c, tau, g_a, z=float(t))) for t in ts]
        second = np.diff(vals, 2)
        assert (second >= -1e-10).all()

    def test_gamma_concave_with_peak_at_center(self, desk):
        f0, tau, g = desk
        curve = PressureCurve(f0, tau, g)
        a_star = beta_prime(curve, 0.0)
        grid = np.linspace(0.35, 0.8, 7)
        gammas = [rate_J(f0, tau, g, float(a)).gamma for a in grid]
        assert (np.diff(gammas, 2) <= 1e-9).all()
        assert all(gamma <= 1e-10 for gamma in gammas)
        assert rate_J(f0, tau, g, a_star).gamma == pytest.approx(0.0, abs=1e-10)


class TestCenterAndNormalize:
    def test_centered_system_has_zero_pressures(self, desk):
        f0, tau, g = desk
        cs = center_and_normalize(f0, tau, g)
        assert pressure_flow(cs.f_c, tau, g) == pytest.approx(0.0, abs=1e-9)
        assert pressure_sigma(cs.f0) == pytest.approx(0.0, abs=1e-10)
        ones = np.ones(build_operator(cs.f0).dim)
        assert np.abs(build_operator(cs.f0).matrix @ ones - ones).max() <= 1e-10

    def test_centering_idempotent(self, golden_roof):
        f, tau, g = golden_roof
        cs = center_and_normalize(f, tau, g)
        second_shift = pressure_flow(cs.f_c, tau, g)
        assert abs(second_shift) <= 1e-9

    def test_gibbs_chain_total_mass(self, golden_roof):
        f, tau, g = golden_roof
        cs = center_and_normalize(f, tau, g)
        assert cs.mu.initial.sum() == pytest.approx(1.0, abs=1e-12)
        assert cs.mu.stationarity_defect <= 1e-9


class TestLatticeCheck:
    def test_zero_observable_always_flagged(self, desk):
        f0, tau, g = desk
        cs = center_and_normalize(f0, tau, g)
        zero = depth1(f0.spec, [0.0, 0.0])
        rep = lattice_check(cs.f0, zero, (0.5, 1.0, 2.0))
        assert rep.flagged
        assert np.allclose(rep.r_values, 1.0, atol=1e-9)

    def test_integer_observable_flagged_at_2pi(self, full2):
        # psi takes values in 1/2 + Z: at u = 2 pi the twist is a global
        # phase and the modulus of the spectrum is unchanged
        f0 = depth1(full2, [-math.log(2.0)] * 2)
        tau = depth1(full2, [1.0, 1.0], "roof")
        g = depth1(full2, [0.0, 1.0])
        psi = g - 0.5 * tau
        rep = lattice_check(f0, psi, (1.0, 2.0 * math.pi))
        assert rep.flagged
        i = list(rep.u_grid).index(2.0 * math.pi)
        assert rep.r_values[i] >= 1.0 - 1e-9

    def test_golden_roof_contracts(self, golden_roof):
        f, tau, g = golden_roof
        cs = center_and_normalize(f, tau, g)
        psi = g - 0.403 * tau
        rep = lattice_check(cs.f0, psi, (0.5, 1.0, 2.0, math.pi, 2.0 * math.pi, 8.0))
        assert not rep.flagged
        assert rep.max_r < 1.0 - 1e-4
