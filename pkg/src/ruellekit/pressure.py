"""Topological pressure, the suspended-flow pressure curve, and rate functions.

The shift pressure of a potential is the log of the leading eigenvalue
of its transfer operator.  For a roof function tau > 0 the flow
pressure of F + t G (with shift representatives f, g) is the unique s
with Pr_sigma(f + t g - s tau) = 0; its value at t is beta(t).  The
large-deviation machinery reduces to this curve: the tilt xi(a) solves
beta'(xi) = a, the rate is J(a) = Pr_sigma(f_c + xi (g - a tau)) after
centering f_c = f - beta(0) tau, and gamma(a) = beta(xi) - xi a
satisfies J = gamma * (mean of tau) under the Gibbs measure of the
tilted potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    BracketFailure,
    LatticeDegenerate,
    NoConvergence,
    OutOfRange,
)
from .potential import LocallyConstantPotential, combine
from .transfer import (
    GibbsMeasure,
    build_operator,
    expectation,
    gibbs_measure,
    leading_eigendata,
    normalize_potential,
)

__all__ = [
    "pressure_sigma",
    "pressure_flow",
    "PressureCurve",
    "beta",
    "beta_prime",
    "solve_xi",
    "variance_flow",
    "RateReport",
    "rate_J",
    "rate_J_infimum",
    "CenteredSystem",
    "center_and_normalize",
    "LatticeReport",
    "lattice_check",
]


def pressure_sigma(phi: LocallyConstantPotential, *, eigen_tol: float = 1e-12) -> float:
    """Shift pressure log(leading eigenvalue of L_phi); phi must be real."""
    if phi.is_complex:
        raise ValueError("pressure is defined for real potentials")
    return leading_eigendata(build_operator(phi), tol=eigen_tol).pressure


def _check_roof(tau: LocallyConstantPotential) -> None:
    if tau.is_complex or (tau.values.real <= 0).any():
        raise ValueError("roof function must be strictly positive")


def pressure_flow(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    t: float = 0.0,
    *,
    root_tol: float = 1e-10,
    eigen_tol: float = 1e-12,
) -> float:
    """Flow pressure: the root s of Pr_sigma(f + t g - s tau) = 0.

    Pr is strictly decreasing in s with slope between -max(tau) and
    -min(tau), which gives a rigorous bracket from the value at s = 0.
    The root is verified to |Pr| <= root_tol.
    """
    _check_roof(tau)

    def F(s: float) -> float:
        return pressure_sigma(combine(f, tau, g, s=s, z=t), eigen_tol=eigen_tol)

    f0 = F(0.0)
    if f0 == 0.0:
        return 0.0
    tau_min = float(tau.values.real.min())
    other = f0 / tau_min
    lo, hi = min(0.0, other), max(0.0, other)
    # With tau constant the pressure is exactly linear in s and the root
    # sits on the bracket endpoint; pad so the sign change is strict.
    pad = 1e-6 * (1.0 + abs(other))
    lo -= pad
    hi += pad
    if not F(lo) >= 0.0 >= F(hi):
        raise BracketFailure(
            f"no sign change for flow pressure on [{lo:.6g}, {hi:.6g}]"
        )
    s_star = float(brentq(F, lo, hi, xtol=1e-14, maxiter=200))
    res = abs(F(s_star))
    if res > root_tol:
        raise NoConvergence(res, 200)
    return s_star


@dataclass
class PressureCurve:
    """beta(t) = flow pressure of F + t G, with evaluations cached per t."""

    f: LocallyConstantPotential
    tau: LocallyConstantPotential
    g: LocallyConstantPotential
    root_tol: float = 1e-10
    eigen_tol: float = 1e-12
    _cache: dict = field(default_factory=dict, repr=False)

    def tilted(self, t: float) -> LocallyConstantPotential:
        """The shift potential f + t g - beta(t) tau (zero shift pressure)."""
        return combine(self.f, self.tau, self.g, s=beta(self, t), z=t)

    def convexity_defect(self) -> float:
        """Worst (most negative) second divided difference over cached t values.

        beta is convex, so this should never dip below numerical noise;
        returns 0.0 when fewer than three points have been evaluated.
        """
        ts = sorted(self._cache)
        if len(ts) < 3:
            return 0.0
        worst = 0.0
        for i in range(1, len(ts) - 1):
            t0, t1, t2 = ts[i - 1], ts[i], ts[i + 1]
            b0, b1, b2 = self._cache[t0], self._cache[t1], self._cache[t2]
            dd = (b2 - b1) / (t2 - t1) - (b1 - b0) / (t1 - t0)
            worst = min(worst, dd / (0.5 * (t2 - t0)))
        return worst


def beta(curve: PressureCurve, t: float) -> float:
    t = float(t)
    if t not in curve._cache:
        curve._cache[t] = pressure_flow(
            curve.f, curve.tau, curve.g, t,
            root_tol=curve.root_tol, eigen_tol=curve.eigen_tol,
        )
    return curve._cache[t]


def _gibbs_at(curve: PressureCurve, t: float) -> GibbsMeasure:
    phi = curve.tilted(t)
    sd = leading_eigendata(build_operator(phi), tol=curve.eigen_tol)
    return gibbs_measure(sd, phi)


def beta_prime(curve: PressureCurve, t: float) -> float:
    """beta'(t) = (int g d mu_t) / (int tau d mu_t), mu_t the tilted Gibbs state.

    This is the exact derivative of the implicit root, not a finite
    difference, so it is accurate at the eigensolver level.
    """
    mu = _gibbs_at(curve, t)
    return float(expectation(mu, curve.g) / expectation(mu, curve.tau))


def variance_flow(curve: PressureCurve, t: float, *, step: float = 1e-3) -> float:
    """beta''(t) by Richardson-extrapolated central differences of beta'."""
    def D(h: float) -> float:
        return (beta_prime(curve, t + h) - beta_prime(curve, t - h)) / (2.0 * h)

    return (4.0 * D(step / 2.0) - D(step)) / 3.0


def solve_xi(
    curve: PressureCurve,
    a: float,
    *,
    t_max: float = 30.0,
    xi_tol: float = 1e-8,
    degenerate_tol: float = 1e-8,
) -> float:
    """Solve beta'(xi) = a on [-t_max, t_max].

    beta is convex so beta' is nondecreasing; the achievable range is
    probed at +-t_max.  Raises OutOfRange when a falls outside it and
    LatticeDegenerate when the curve has no spread (g cohomologous to a
    multiple of tau), in which case no tilt exists.
    """
    lo_val = beta_prime(curve, -t_max)
    hi_val = beta_prime(curve, t_max)
    if hi_val - lo_val <= degenerate_tol:
        if abs(a - 0.5 * (lo_val + hi_val)) <= xi_tol:
            raise LatticeDegenerate(
                f"pressure curve is flat: beta' constant at {lo_val:.12g}"
            )
        raise OutOfRange(a, (lo_val, hi_val))
    if not lo_val < a < hi_val:
        raise OutOfRange(a, (lo_val, hi_val))
    xi = float(brentq(lambda t: beta_prime(curve, t) - a, -t_max, t_max, xtol=1e-12))
    res = abs(beta_prime(curve, xi) - a)
    if res > xi_tol:
        raise NoConvergence(res, 0)
    var = variance_flow(curve, xi)
    if var <= degenerate_tol:
        raise LatticeDegenerate(f"flow variance {var:.3e} at xi={xi:.6g}")
    return xi


@dataclass(frozen=True)
class RateReport:
    """Rate-function data at one velocity a."""

    a: float
    a_star: float
    xi: float
    J: float
    gamma: float
    omega: float
    mean_tau: float
    pressure_shift: float  # beta(0) removed when centering f
    diagnostics: dict


def _omega_second_diff(
    f_c: LocallyConstantPotential,
    g_a: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    xi: float,
    *,
    step: float = 1e-3,
    eigen_tol: float = 1e-12,
) -> float:
    """omega(a) = d^2/dt^2 Pr_sigma(f_c + t g_a) at t = xi (Richardson)."""
    def u(t: float) -> float:
        return pressure_sigma(combine(f_c, tau, g_a, z=t), eigen_tol=eigen_tol)

    def D(h: float) -> float:
        return (u(xi + h) - 2.0 * u(xi) + u(xi - h)) / (h * h)

    return (4.0 * D(step / 2.0) - D(step)) / 3.0


def _inf_pressure(
    f_c: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g_a: LocallyConstantPotential,
    xi_hint: float,
    *,
    eigen_tol: float = 1e-12,
) -> float:
    """inf over t of Pr_sigma(f_c + t g_a), golden section around the hint."""
    def u(t: float) -> float:
        return pressure_sigma(combine(f_c, tau, g_a, z=t), eigen_tol=eigen_tol)

    res = minimize_scalar(
        u,
        bracket=(xi_hint - 2.0, xi_hint, xi_hint + 2.0),
        method="golden",
        options={"xtol": 1e-10},
    )
    return float(res.fun)


def rate_J(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    a: float,
    *,
    t_max: float = 30.0,
    xi_tol: float = 1e-8,
    root_tol: float = 1e-10,
    eigen_tol: float = 1e-12,
) -> RateReport:
    """Full rate report at velocity a.

    Centers f to zero flow pressure, solves the tilt xi(a) from the
    flow-pressure curve, and returns the rate J(a) computed as the
    infimum over t of Pr_sigma(f_c + t (g - a tau)), together with
    gamma(a) = beta(xi) - xi a, the curvature omega(a) at xi, and the
    mean roof under the tilted Gibbs state of f_c + xi g - beta(xi) tau.
    That state averages g - a tau to zero, which makes J equal to
    gamma * mean_tau up to solver tolerance; the residual is recorded
    as a diagnostic, not enforced.
    """
    P_flow = pressure_flow(f, tau, g, 0.0, root_tol=root_tol, eigen_tol=eigen_tol)
    f_c = combine(f, tau, g, s=P_flow)
    curve = PressureCurve(f_c, tau, g, root_tol=root_tol, eigen_tol=eigen_tol)
    a_star = beta_prime(curve, 0.0)
    xi = solve_xi(curve, a, t_max=t_max, xi_tol=xi_tol)
    g_a = g - a * tau
    J = _inf_pressure(f_c, tau, g_a, xi, eigen_tol=eigen_tol)
    gamma = beta(curve, xi) - xi * a
    omega = _omega_second_diff(f_c, g_a, tau, xi, eigen_tol=eigen_tol)
    mu_tilt = _gibbs_at(curve, xi)
    mean_tau = float(expectation(mu_tilt, tau))
    diagnostics = {
        "xi_residual": abs(beta_prime(curve, xi) - a),
        "j_gamma_identity": abs(J - gamma * mean_tau),
        "beta_second_xi": variance_flow(curve, xi),
        "j_at_xi_gap": abs(
            pressure_sigma(combine(f_c, tau, g_a, z=xi), eigen_tol=eigen_tol) - J
        ),
    }
    return RateReport(
        a=a,
        a_star=a_star,
        xi=xi,
        J=J,
        gamma=gamma,
        omega=omega,
        mean_tau=mean_tau,
        pressure_shift=P_flow,
        diagnostics=diagnostics,
    )


def rate_J_infimum(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    a: float,
    *,
    xi_hint: float | None = None,
    root_tol: float = 1e-10,
    eigen_tol: float = 1e-12,
) -> float:
    """J(a) as inf over t of Pr_sigma(f_c + t (g - a tau)), by golden section.

    Independent route used to cross-check the tilt-based value: the
    infimum is scanned on [xi - 2, xi + 2] around a hint (the solved
    tilt when not given).
    """
    P_flow = pressure_flow(f, tau, g, 0.0, root_tol=root_tol, eigen_tol=eigen_tol)
    f_c = combine(f, tau, g, s=P_flow)
    g_a = g - a * tau
    if xi_hint is None:
        curve = PressureCurve(f_c, tau, g, root_tol=root_tol, eigen_tol=eigen_tol)
        xi_hint = solve_xi(curve, a)
    return _inf_pressure(f_c, tau, g_a, float(xi_hint), eigen_tol=eigen_tol)


@dataclass(frozen=True)
class CenteredSystem:
    """Centered and normalized form of (f, tau, g), shared by the verifiers.

    f_c = f - beta(0) tau has zero flow pressure; f0 is its normalized
    potential (one level deeper, L 1 = 1); mu is the Gibbs chain of f0.
    """

    P_flow: float
    f_c: LocallyConstantPotential
    f0: LocallyConstantPotential
    mu: GibbsMeasure
    curve: PressureCurve


def center_and_normalize(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    *,
    root_tol: float = 1e-10,
    eigen_tol: float = 1e-12,
) -> CenteredSystem:
    P_flow = pressure_flow(f, tau, g, 0.0, root_tol=root_tol, eigen_tol=eigen_tol)
    f_c = combine(f, tau, g, s=P_flow)
    sd_c = leading_eigendata(build_operator(f_c), tol=eigen_tol)
    f0 = normalize_potential(f_c, sd_c, tol=eigen_tol)
    sd0 = leading_eigendata(build_operator(f0), tol=eigen_tol)
    mu = gibbs_measure(sd0, f0)
    curve = PressureCurve(f_c, tau, g, root_tol=root_tol, eigen_tol=eigen_tol)
    return CenteredSystem(P_flow=P_flow, f_c=f_c, f0=f0, mu=mu, curve=curve)


@dataclass(frozen=True)
class LatticeReport:
    """Empirical spectral radii of the twisted family L_{f0 + i u psi}."""

    u_grid: np.ndarray
    r_values: np.ndarray
    max_r: float
    argmax_u: float
    flagged: bool
    tol: float


def lattice_check(
    f0: LocallyConstantPotential,
    psi: LocallyConstantPotential,
    u_grid,
    *,
    iters: int = 200,
    lattice_tol: float = 1e-6,
) -> LatticeReport:
    """Probe r(u) = empirical spectral radius of L_{f0 + i u psi}.

    r(u) is fit from the decay of sup|L^m 1| over the tail half of
    `iters` iterations, with per-step renormalization against
    under/overflow.  The report is flagged when some u != 0 has
    r(u) >= 1 - lattice_tol: a lattice (or numerically near-lattice)
    observable, for which the sharp asymptotics are not expected.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    r_values = np.empty(len(u_grid))
    for idx, u in enumerate(u_grid):
        phi = f0 + (1j * float(u)) * psi
        M = build_operator(phi).matrix
        v = np.ones(M.shape[0], dtype=complex)
        logs = np.empty(iters)
        log_acc = 0.0
        dead = False
        for m in range(iters):
            v = M @ v
            s = float(np.abs(v).max())
            if s == 0.0 or not np.isfinite(s):
                dead = True
                break
            log_acc += math.log(s)
            logs[m] = log_acc
            v = v / s
        if dead:
            r_values[idx] = 0.0
            continue
        mm = np.arange(1, iters + 1)
        lo = iters // 2
        slope = np.polyfit(mm[lo:], logs[lo:], 1)[0]
        r_values[idx] = math.exp(slope)
    nonzero = np.abs(u_grid) > 0
    over = nonzero & (r_values >= 1.0 - lattice_tol)
    flagged = bool(over.any())
    if nonzero.any():
        sub = np.where(nonzero)[0]
        best = sub[np.argmax(r_values[sub])]
        max_r = float(r_values[best])
        argmax_u = float(u_grid[best])
    else:
        max_r = float(r_values.max()) if len(r_values) else 0.0
        argmax_u = float(u_grid[0]) if len(u_grid) else 0.0
    return LatticeReport(
        u_grid=u_grid,
        r_values=r_values,
        max_r=max_r,
        argmax_u=argmax_u,
        flagged=flagged,
        tol=lattice_tol,
    )
