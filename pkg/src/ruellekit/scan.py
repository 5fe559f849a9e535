"""Empirical decay scan of the two-parameter twisted operator family.

Iterates L_{f - (a+ib) tau + (c+iw) g} on a seed function, recording the
frequency-weighted norm ||L^m h||_{beta,b} e^{-Pm} with P the pressure
of f.  The fitted tail slope rho_hat(b, w) is the empirical contraction
rate; the envelope report compares the transient peaks across b with a
power law C |b|^e.  Everything here is measurement, not theorem: the
uniform-contraction hypotheses are geometric and not checkable on a
symbolic model, so reports are advisory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .potential import LocallyConstantPotential, combine, norm_beta_b
from .pressure import pressure_sigma
from .sft import ThetaMetric, admissible_word_list
from .transfer import build_operator

__all__ = [
    "ScanConfig",
    "DecayFit",
    "EnvelopeReport",
    "SweepResult",
    "decay_sequence",
    "envelope_report",
    "two_parameter_sweep",
]

_H_SEEDS = ("constant_one", "random_unit", "cylinder_indicator")


@dataclass(frozen=True)
class ScanConfig:
    """Grid and iteration settings for the decay scan.

    w values are tied to b by w = kappa * b over kappa_grid, with
    |kappa| <= B; the random seed vector (when h_seed = random_unit) is
    drawn from `seed` once per run.
    """

    f: LocallyConstantPotential
    tau: LocallyConstantPotential
    g: LocallyConstantPotential
    metric: ThetaMetric
    b_grid: tuple
    kappa_grid: tuple
    a: float = 0.0
    c: float = 0.0
    B: float = 1.0
    m_max: int = 60
    h_seed: str = "constant_one"
    seed: int = 20240814
    epsilon: float = 0.5
    P: float | None = None

    def __post_init__(self):
        if len(self.b_grid) == 0 or len(self.kappa_grid) == 0:
            raise ValueError("b_grid and kappa_grid must be nonempty")
        if any(abs(b) < 1.0 for b in self.b_grid):
            raise ValueError("b values must satisfy |b| >= 1")
        if any(abs(k) > self.B + 1e-12 for k in self.kappa_grid):
            raise ValueError(f"kappa values must satisfy |kappa| <= B = {self.B}")
        if self.m_max < 4:
            raise ValueError("m_max too small to fit a tail")
        if self.h_seed not in _H_SEEDS:
            raise ValueError(f"h_seed must be one of {_H_SEEDS}")


@dataclass(frozen=True)
class DecayFit:
    """One (b, w) cell: the norm sequence and its fitted tail rate."""

    b: float
    w: float
    y: np.ndarray
    log_y: np.ndarray
    rho_hat: float
    residual: float


def _seed_vector(cfg: ScanConfig, depth: int) -> np.ndarray:
    n = len(admissible_word_list(cfg.f.spec, depth))
    if cfg.h_seed == "constant_one":
        return np.ones(n, dtype=complex)
    if cfg.h_seed == "cylinder_indicator":
        v = np.zeros(n, dtype=complex)
        v[0] = 1.0
        return v
    rng = np.random.default_rng(cfg.seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def decay_sequence(cfg: ScanConfig, b: float, w: float) -> DecayFit:
    """Iterate the twisted operator at (b, w) and fit the tail decay rate.

    The iterate is renormalized every step (the factor tracked in log
    space) so the sequence never under- or overflows; y_m is the
    ||.||_{beta,b} norm of L^m h times e^{-Pm}.  Frequencies |b| < 1 use
    weight 1 in the norm (the weighted norm is only defined from |b| = 1;
    below that the unweighted Holder norm is the natural continuation).
    rho_hat is the least-squares slope of log y_m over the second half
    of the window, skipping the pre-asymptotic transient.
    """
    spec = cfg.f.spec
    depth = max(cfg.f.depth, cfg.tau.depth, cfg.g.depth)
    phi = combine(cfg.f, cfg.tau, cfg.g, s=complex(cfg.a, b), z=complex(cfg.c, w))
    M = build_operator(phi.at_depth(depth)).matrix
    P = cfg.P if cfg.P is not None else pressure_sigma(cfg.f)
    b_eff = max(abs(b), 1.0)
    v = _seed_vector(cfg, depth)
    nb0 = norm_beta_b(spec, depth, v, cfg.metric, b_eff).value
    v = v / nb0
    log_y = np.empty(cfg.m_max)
    acc = 0.0
    for m in range(cfg.m_max):
        v = M @ v
        nb = norm_beta_b(spec, depth, v, cfg.metric, b_eff).value
        if not (np.isfinite(nb) and nb > 0.0):
            raise FloatingPointError(
                f"decay iteration degenerated at m={m + 1}, (b,w)=({b},{w}): norm={nb}"
            )
        acc += math.log(nb) - P
        log_y[m] = acc
        v = v / nb
    mm = np.arange(1, cfg.m_max + 1)
    lo = cfg.m_max // 2
    coeffs = np.polyfit(mm[lo:], log_y[lo:], 1)
    rho_hat = math.exp(coeffs[0])
    fit_vals = np.polyval(coeffs, mm[lo:])
    residual = float(np.abs(log_y[lo:] - fit_vals).max())
    with np.errstate(under="ignore"):
        y = np.exp(log_y)
    return DecayFit(b=float(b), w=float(w), y=y, log_y=log_y, rho_hat=rho_hat, residual=residual)


@dataclass(frozen=True)
class EnvelopeReport:
    """Power-law fit of the transient envelope M(b) ~ C |b|^e_fit."""

    rho_global: float
    b_values: tuple
    M_values: tuple
    C: float | None
    e_fit: float | None
    epsilon: float
    lattice_like: bool
    flagged: bool
    note: str


def envelope_report(fits, epsilon: float) -> EnvelopeReport:
    """Envelope across a b-grid at fixed kappa.

    M(b) = max_m y_m / rho_global^m with rho_global the worst fitted
    rate; the exponent of M(b) ~ C |b|^e is least-squares in log-log.
    Flagged when e_fit exceeds epsilon or when rho_global is so close to
    1 that the envelope is meaningless (lattice-like behaviour).
    """
    fits = list(fits)
    if not fits:
        raise ValueError("need at least one fit")
    rho_global = max(f.rho_hat for f in fits)
    lattice_like = rho_global >= 1.0 - 1e-3
    b_values = []
    M_values = []
    for f in fits:
        mm = np.arange(1, len(f.log_y) + 1)
        M = math.exp(float((f.log_y - mm * math.log(max(rho_global, 1e-12))).max()))
        b_values.append(abs(f.b))
        M_values.append(M)
    distinct = len(set(b_values)) >= 2
    if distinct:
        lg_b = np.log(np.asarray(b_values))
        lg_M = np.log(np.maximum(np.asarray(M_values), 1e-300))
        slope, intercept = np.polyfit(lg_b, lg_M, 1)
        e_fit: float | None = float(slope)
        C: float | None = float(math.exp(intercept))
    else:
        e_fit = None
        C = None
    flagged = lattice_like or (e_fit is not None and e_fit > epsilon)
    if lattice_like:
        note = f"rho_global = {rho_global:.9g} is lattice-like; envelope not meaningful"
    elif e_fit is None:
        note = "single |b| value: envelope exponent undefined"
    elif flagged:
        note = f"e_fit = {e_fit:.6g} exceeds epsilon = {epsilon:g}"
    else:
        note = f"envelope within |b|^epsilon band (e_fit = {e_fit:.6g})"
    return EnvelopeReport(
        rho_global=rho_global,
        b_values=tuple(b_values),
        M_values=tuple(M_values),
        C=C,
        e_fit=e_fit,
        epsilon=epsilon,
        lattice_like=lattice_like,
        flagged=flagged,
        note=note,
    )


@dataclass(frozen=True)
class SweepResult:
    """rho_hat over the (b, kappa) grid, row index b, column index kappa."""

    b_grid: tuple
    kappa_grid: tuple
    rho: np.ndarray
    fits: tuple  # fits[i][j] aligned with (b_grid[i], kappa_grid[j])
    max_rho: float


def two_parameter_sweep(cfg: ScanConfig) -> SweepResult:
    """Run decay_sequence over the full (b, kappa) grid, w = kappa * b."""
    if cfg.P is None:
        cfg = replace(cfg, P=pressure_sigma(cfg.f))
    rho = np.empty((len(cfg.b_grid), len(cfg.kappa_grid)))
    fits = []
    for i, b in enumerate(cfg.b_grid):
        row = []
        for j, kappa in enumerate(cfg.kappa_grid):
            fit = decay_sequence(cfg, float(b), float(kappa) * float(b))
            rho[i, j] = fit.rho_hat
            row.append(fit)
        fits.append(tuple(row))
    return SweepResult(
        b_grid=tuple(float(b) for b in cfg.b_grid),
        kappa_grid=tuple(float(k) for k in cfg.kappa_grid),
        rho=rho,
        fits=tuple(fits),
        max_rho=float(rho.max()),
    )
