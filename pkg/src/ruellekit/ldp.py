"""Sharp large-deviation window masses, computed three independent ways.

For the Gibbs measure mu of the centered normalized potential, the
quantity of interest at velocity a and shrink rate delta is

    rho(n) = mu{ x : g^n(x) - a tau^n(x) in (-delta_n, delta_n) },
    delta_n = e^{-delta n},

together with its smoothed variant (a cutoff function chi replacing the
indicator) and the asymptote 2 delta_n e^{n J(a)} / sqrt(2 pi omega(a) n).
The three routes are: exact cylinder enumeration, the same enumeration
against chi, and a Fourier path that pairs iterates of the twisted
operators L_{f0 + (xi + iu) g_a} with the Gibbs measure under a
trapezoid quadrature in u.  Agreement of the three is the artifact's
main consistency experiment.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureUnderresolved, TooLarge
from .potential import LocallyConstantPotential, birkhoff_values
from .pressure import (
    CenteredSystem,
    LatticeReport,
    RateReport,
    center_and_normalize,
    lattice_check,
    rate_J,
)
from .sft import (
    block_successor_table,
    block_suffix_index,
    count_admissible_words,
)
from .transfer import (
    GibbsMeasure,
    _operator_structure,
    cylinder_masses,
    gibbs_measure,
    leading_eigendata,
    build_operator,
)

__all__ = [
    "CutoffFunction",
    "cutoff",
    "QuadratureSpec",
    "WindowMass",
    "SpectralWindow",
    "rho_exact",
    "rho_smooth_direct",
    "rho_smooth_spectral",
    "asymptote",
    "DeltaConstraintReport",
    "delta_constraint_check",
    "LdpRunSpec",
    "LdpRow",
    "LdpTable",
    "build_ldp_table",
    "stream_window_sums",
]


# ---------------------------------------------------------------------------
# Cutoff functions

@dataclass(frozen=True)
class CutoffFunction:
    """A nonnegative cutoff supported in [-half_width, half_width].

    `fourier` evaluates chi_hat(z) = integral of chi(t) e^{-izt} dt and
    accepts complex arguments (the spectral path needs chi_hat on a
    horizontal line below the real axis).
    """

    kind: str
    half_width: float
    integral: float
    value: Callable
    fourier: Callable


@lru_cache(maxsize=32)
def _leggauss(n_nodes: int):
    return np.polynomial.legendre.leggauss(n_nodes)


def _triangle_hat(z: np.ndarray) -> np.ndarray:
    """(sin(z/2) / (z/2))^2 with a series patch near 0."""
    z = np.asarray(z, dtype=complex)
    w = z / 2.0
    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w) < 1e-4
    ws = w[small]
    out[small] = 1.0 - ws * ws / 3.0 + 2.0 * ws**4 / 45.0
    wl = w[~small]
    s = np.sin(wl) / wl
    out[~small] = s * s
    return out


def _bump_raw(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def _bump_hat(z: np.ndarray, half_width: float) -> np.ndarray:
    """Gauss-Legendre evaluation of the bump transform; node count scales
    with the largest oscillation frequency so the rule stays resolved."""
    z = np.asarray(z, dtype=complex)
    zw = z * half_width
    max_osc = float(np.abs(zw.real).max()) if zw.size else 0.0
    n_nodes = int(64 * math.ceil((0.75 * max_osc + 120.0) / 64.0))
    nodes, weights = _leggauss(n_nodes)
    vals = weights * _bump_raw(nodes)
    # chi_w(t) = bump(t / w): substitute t = w * node
    phase = np.exp(-1j * np.multiply.outer(zw, nodes))
    return half_width * (phase @ vals)


def cutoff(kind: str, half_width: float = 1.0) -> CutoffFunction:
    """Build a cutoff of the given kind ("triangle" or "smooth_bump").

    half_width rescales the support; the transform picks up the usual
    w * chi_hat(w z) scaling.
    """
    if half_width <= 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    w = float(half_width)
    if kind == "triangle":
        def value(t):
            t = np.asarray(t, dtype=float)
            return np.maximum(0.0, 1.0 - np.abs(t) / w)

        def fourier(z):
            return w * _triangle_hat(w * np.asarray(z, dtype=complex))

        return CutoffFunction(
            kind=kind, half_width=w, integral=w, value=value, fourier=fourier
        )
    if kind == "smooth_bump":
        nodes, weights = _leggauss(400)
        base_integral = float(weights @ _bump_raw(nodes))

        def value(t):
            return _bump_raw(np.asarray(t, dtype=float) / w)

        def fourier(z):
            return _bump_hat(np.asarray(z, dtype=complex), w)

        return CutoffFunction(
            kind=kind,
            half_width=w,
            integral=w * base_integral,
            value=value,
            fourier=fourier,
        )
    raise ValueError(f"unknown cutoff kind {kind!r}")


# ---------------------------------------------------------------------------
# Streaming cylinder enumeration

def _tree_fold(parts: list) -> np.ndarray:
    """Pairwise fold with a shape fixed by len(parts), independent of
    how the parts were produced (thread count must not change bytes)."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to fold")
    while len(parts) > 1:
        nxt = []
        for i in range(0, len(parts) - 1, 2):
            nxt.append(parts[i] + parts[i + 1])
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def stream_window_sums(
    mu: GibbsMeasure,
    psi: LocallyConstantPotential,
    n: int,
    reducer: Callable,
    *,
    length: int | None = None,
    cap: int = 1 << 20,
    threads: int = 1,
) -> np.ndarray:
    """Reduce (mass, birkhoff psi^n) over all admissible words.

    Streams the cylinders of length max(n + depth(psi) - 1, depth(mu))
    through a trailing-block frontier: each extension step multiplies in
    one chain transition and adds one Birkhoff term.  `reducer` maps the
    (mass, y) arrays of a finished batch to a fixed-length float vector;
    batch partials are combined by a pairwise tree whose shape depends
    only on the word counts, so results are bit-stable under threading.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if psi.is_complex:
        raise ValueError("streaming accumulates real Birkhoff sums")
    spec = mu.spec
    m = mu.depth
    d = psi.depth
    L = max(n + d - 1, m) if length is None else max(length, m, d)
    B = max(m, d)
    k = spec.k
    succ = block_successor_table(spec, B)
    sufm = block_suffix_index(spec, B, m)
    sufd = block_suffix_index(spec, B, d)
    step_mass = np.zeros(succ.shape)
    for j in range(k):
        valid = succ[:, j] >= 0
        step_mass[valid, j] = mu.transition[sufm[valid], sufm[succ[valid, j]]]
    step_psi = psi.values[sufd].astype(float)
    init_mass = cylinder_masses(mu, B)
    init_y = birkhoff_values(psi, B, min(n, B - d + 1)).astype(float)
    n_init = len(init_mass)
    split_cap = max(cap // k, 1)

    def extend(blk, mass, y, ell):
        add_term = (ell + 1 - d) < n  # 0-based index of the newly completed term
        parts_b, parts_m, parts_y = [], [], []
        for j in range(k):
            s2 = succ[blk, j]
            sel = s2 >= 0
            nb = s2[sel]
            parts_b.append(nb)
            parts_m.append(mass[sel] * step_mass[blk[sel], j])
            parts_y.append(y[sel] + step_psi[nb] if add_term else y[sel])
        return (
            np.concatenate(parts_b),
            np.concatenate(parts_m),
            np.concatenate(parts_y),
        )

    def process(blk, mass, y, ell):
        while True:
            if ell == L:
                return reducer(mass, y)
            if len(blk) > split_cap:
                mid = len(blk) // 2
                left = process(blk[:mid], mass[:mid], y[:mid], ell)
                right = process(blk[mid:], mass[mid:], y[mid:], ell)
                return left + right
            blk, mass, y = extend(blk, mass, y, ell)
            ell += 1

    # Fixed top-level split by initial block index: the chunk layout must
    # not depend on the worker count.
    n_chunks = min(n_init, 64)
    bounds = [n_init * q // n_chunks for q in range(n_chunks + 1)]
    blocks = np.arange(n_init)
    tasks = [
        (blocks[b0:b1], init_mass[b0:b1], init_y[b0:b1], B)
        for b0, b1 in zip(bounds[:-1], bounds[1:])
        if b1 > b0
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda t: process(*t), tasks))
    else:
        parts = [process(*t) for t in tasks]
    return _tree_fold(parts)


@dataclass(frozen=True)
class WindowMass:
    """Exact window mass with boundary accounting."""

    value: float
    boundary_hits: int
    word_count: int
    delta_n: float
    total_mass: float


def _guarded_length(mu, psi, n, guard):
    L = max(n + psi.depth - 1, mu.depth)
    count = count_admissible_words(mu.spec, L)
    if count > guard:
        raise TooLarge(count, guard)
    return L, count


def rho_exact(
    mu: GibbsMeasure,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    a: float,
    delta: float,
    n: int,
    *,
    guard: float = 1e8,
    snap: float = 1e-14,
    threads: int = 1,
    cap: int = 1 << 20,
) -> WindowMass:
    """mu{ |g^n - a tau^n| < e^{-delta n} } by exact cylinder enumeration.

    Words whose Birkhoff value lies within `snap` of an endpoint are
    counted as inside and tallied separately: open versus closed is
    measure-irrelevant but bit-relevant in floating point.
    """
    psi = g - float(a) * tau
    L, count = _guarded_length(mu, psi, n, guard)
    delta_n = math.exp(-delta * n)

    def reducer(mass, y):
        ay = np.abs(y)
        on_edge = np.abs(ay - delta_n) <= snap
        inside = (ay < delta_n) | on_edge
        return np.array(
            [mass[inside].sum(), float(on_edge.sum()), mass.sum()]
        )

    acc = stream_window_sums(mu, psi, n, reducer, length=L, cap=cap, threads=threads)
    return WindowMass(
        value=float(acc[0]),
        boundary_hits=int(round(acc[1])),
        word_count=count,
        delta_n=delta_n,
        total_mass=float(acc[2]),
    )


def rho_smooth_direct(
    mu: GibbsMeasure,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    a: float,
    delta: float,
    n: int,
    chi: CutoffFunction,
    *,
    guard: float = 1e8,
    threads: int = 1,
    cap: int = 1 << 20,
) -> float:
    """Integral of chi(delta_n^{-1} (g^n - a tau^n)) d mu, exactly on cylinders."""
    psi = g - float(a) * tau
    L, _ = _guarded_length(mu, psi, n, guard)
    delta_n = math.exp(-delta * n)

    def reducer(mass, y):
        return np.array([(mass * chi.value(y / delta_n)).sum()])

    acc = stream_window_sums(mu, psi, n, reducer, length=L, cap=cap, threads=threads)
    return float(acc[0])


# ---------------------------------------------------------------------------
# Fourier / spectral path

@dataclass(frozen=True)
class QuadratureSpec:
    """Trapezoid rule over |u| <= u_max with the given step; the fine
    (step/2) and coarse results must agree to rel_tol."""

    u_max: float = 200.0
    step: float = 0.01
    rel_tol: float = 1e-6


@dataclass(frozen=True)
class SpectralWindow:
    value: float
    imag_residue: float
    fine: complex
    coarse: complex
    n_nodes: int
    u_max: float
    step: float
    tail_fraction: float


def rho_smooth_spectral(
    f0: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    a: float,
    xi: float,
    delta: float,
    n: int,
    chi: CutoffFunction,
    quad: QuadratureSpec,
    *,
    mu: GibbsMeasure | None = None,
    node_chunk: int = 1 << 15,
) -> SpectralWindow:
    """Smoothed window mass via the twisted-operator Fourier path.

    Uses the exact identity  E_mu[e^{z g_a^n}] = < L_{f0 + z g_a}^n 1, mu >
    at z = xi + iu and inverts the tilted transform:

        rho_smooth = (delta_n / 2 pi) * int I(u) chi_hat(delta_n (u - i xi)) du.

    Quadrature is a trapezoid on the step/2 grid; the value is certified
    by comparing with the step grid (same samples, every other node) and
    QuadratureUnderresolved is raised when they disagree beyond rel_tol.
    """
    psi = g - float(a) * tau
    if psi.spec != f0.spec:
        raise ValueError("potentials live on different subshifts")
    depth = max(f0.depth, psi.depth)
    base = (f0 + float(xi) * psi).at_depth(depth)
    psi_d = psi.at_depth(depth)
    if mu is None:
        mu = gibbs_measure(leading_eigendata(build_operator(f0)), f0)
    masses = cylinder_masses(mu, depth)
    rows, cols = _operator_structure(f0.spec, depth)
    dim = len(masses)
    Bmat = np.zeros((dim, dim))
    Bmat[rows, cols] = np.exp(base.values.real)[cols]
    delta_n = math.exp(-delta * n)
    K = max(1, int(round(quad.u_max / quad.step)))
    u_max_eff = K * quad.step
    n_fine = 4 * K + 1
    u_nodes = np.linspace(-u_max_eff, u_max_eff, n_fine)
    psi_vals = psi_d.values.real
    pairing = np.empty(n_fine, dtype=complex)
    for start in range(0, n_fine, node_chunk):
        u_chunk = u_nodes[start : start + node_chunk]
        phase = np.exp(1j * np.multiply.outer(psi_vals, u_chunk))
        v = np.ones((dim, len(u_chunk)), dtype=complex)
        for _ in range(n):
            v = Bmat @ (phase * v)
        pairing[start : start + len(u_chunk)] = masses @ v
    integrand = pairing * chi.fourier(delta_n * (u_nodes - 1j * float(xi)))
    h_fine = quad.step / 2.0
    fine = h_fine * (integrand.sum() - 0.5 * (integrand[0] + integrand[-1]))
    coarse_samples = integrand[::2]
    coarse = quad.step * (
        coarse_samples.sum() - 0.5 * (coarse_samples[0] + coarse_samples[-1])
    )
    scale = delta_n / (2.0 * math.pi)
    fine_val = scale * fine
    coarse_val = scale * coarse
    diff = abs(fine_val - coarse_val)
    allowed = quad.rel_tol * max(abs(fine_val), abs(coarse_val), 1e-30)
    if diff > allowed:
        raise QuadratureUnderresolved(
            f"step halving moved the integral by {diff:.3e} "
            f"(allowed {allowed:.3e}); refine step={quad.step} or u_max={quad.u_max}"
        )
    # Advisory truncation diagnostic: share of |integrand| mass in the
    # outermost 5% of the window on each side.
    absint = np.abs(integrand)
    edge = max(1, n_fine // 20)
    total_abs = absint.sum() - 0.5 * (absint[0] + absint[-1])
    tail_abs = absint[:edge].sum() + absint[-edge:].sum()
    tail_fraction = float(tail_abs / total_abs) if total_abs > 0 else 0.0
    return SpectralWindow(
        value=float(fine_val.real),
        imag_residue=float(abs(fine_val.imag)),
        fine=complex(fine_val),
        coarse=complex(coarse_val),
        n_nodes=n_fine,
        u_max=u_max_eff,
        step=quad.step,
        tail_fraction=tail_fraction,
    )


# ---------------------------------------------------------------------------
# Asymptote and the delta advisory

def asymptote(rr, delta: float, n: int, mode: str = "indicator", chi: CutoffFunction | None = None) -> float:
    """The sharp-asymptote value at row n.

    indicator mode: 2 delta_n e^{n J} / sqrt(2 pi omega n); smooth mode
    replaces the 2 by the integral of the cutoff.  `rr` is a RateReport
    or any object with J and omega attributes.
    """
    J = rr.J
    omega = rr.omega
    if omega <= 0:
        raise ValueError(f"asymptote needs omega > 0, got {omega}")
    if mode == "indicator":
        width = 2.0
    elif mode == "smooth":
        if chi is None:
            raise ValueError("smooth mode needs the cutoff")
        width = chi.integral
    else:
        raise ValueError(f"unknown mode {mode!r}")
    delta_n = math.exp(-delta * n)
    return width * delta_n * math.exp(n * J) / math.sqrt(2.0 * math.pi * omega * n)


@dataclass(frozen=True)
class DeltaConstraintReport:
    """Advisory check of delta against the empirical decay rate."""

    delta: float
    rho_hat: float
    ceiling: float
    delta_ok: bool
    sequence_ok: bool
    violations: tuple


def delta_constraint_check(
    delta: float, rho_hat: float, n_values: Sequence = ()
) -> DeltaConstraintReport:
    """Report whether delta <= -log(rho_hat)/2 and n rho_hat^n e^{2 delta n} <= 1.

    Advisory only: rho_hat is an empirical stand-in for the true decay
    rate, which is not computable.
    """
    if not 0.0 < rho_hat < 1.0:
        raise ValueError(f"rho_hat must lie in (0,1), got {rho_hat}")
    ceiling = -math.log(rho_hat) / 2.0
    delta_ok = delta <= ceiling + 1e-15
    violations = []
    for n in n_values:
        lhs = n * rho_hat**n * math.exp(2.0 * delta * n)
        if lhs > 1.0 + 1e-12:
            violations.append((int(n), float(lhs)))
    return DeltaConstraintReport(
        delta=float(delta),
        rho_hat=float(rho_hat),
        ceiling=ceiling,
        delta_ok=delta_ok,
        sequence_ok=not violations,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Table orchestration

@dataclass(frozen=True)
class LdpRunSpec:
    """Everything build_ldp_table needs beyond the three potentials."""

    a: float
    delta: float
    n_values: tuple
    chi_kind: str = "triangle"
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    guard: float = 1e8
    snap: float = 1e-14
    lattice_u_grid: tuple = (0.5, 1.0, 2.0, math.pi, 2.0 * math.pi, 8.0)
    lattice_iters: int = 200
    lattice_tol: float = 1e-6
    threads: int = 1
    eigen_tol: float = 1e-12
    root_tol: float = 1e-10
    xi_tol: float = 1e-8
    t_max: float = 30.0


@dataclass(frozen=True)
class LdpRow:
    n: int
    delta_n: float
    rho_exact: float | None
    rho_smooth_direct: float | None
    rho_smooth_spectral: float
    asymptote_indicator: float
    asymptote_smooth: float
    ratio_exact: float | None
    ratio_smooth: float | None
    T_n: float
    w_form: float
    boundary_hits: int | None
    word_count: int | None
    imag_residue: float
    tail_fraction: float


@dataclass(frozen=True)
class LdpTable:
    a: float
    delta: float
    chi_kind: str
    rate: RateReport
    lattice: LatticeReport
    delta_report: DeltaConstraintReport
    rows: tuple
    warnings: tuple
    guard_tripped: bool


def build_ldp_table(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    run: LdpRunSpec,
) -> LdpTable:
    """Assemble the full verification table for one (a, delta) experiment.

    Centers and normalizes the system once, computes the rate report,
    runs the lattice probe on the tilt observable, and fills one row per
    n with the three rho values, the two asymptotes, their ratios, and
    the rescaled diagnostics T_n = n * mean_tau and
    w_form = delta_n e^{gamma T_n} / sqrt(T_n).  Rows whose enumeration
    would exceed the guard keep only the spectral value.
    """
    warnings: list[str] = []
    cs: CenteredSystem = center_and_normalize(
        f, tau, g, root_tol=run.root_tol, eigen_tol=run.eigen_tol
    )
    rr = rate_J(
        f, tau, g, run.a,
        t_max=run.t_max, xi_tol=run.xi_tol,
        root_tol=run.root_tol, eigen_tol=run.eigen_tol,
    )
    chi = cutoff(run.chi_kind)
    psi = g - run.a * tau
    lattice = lattice_check(
        cs.f0, psi, run.lattice_u_grid,
        iters=run.lattice_iters, lattice_tol=run.lattice_tol,
    )
    if lattice.flagged:
        warnings.append(
            f"Lattice: r(u={lattice.argmax_u:.9g}) = {lattice.max_r:.9g} >= 1 - {lattice.tol:g}; "
            "sharp asymptotics not expected"
        )
    # The empirical decay proxy for the delta advisory is the worst
    # observed contraction over the probed nonzero frequencies.
    rho_hat_proxy = min(max(lattice.max_r, 1e-12), 1.0 - 1e-12)
    delta_report = delta_constraint_check(run.delta, rho_hat_proxy, run.n_values)
    if not delta_report.delta_ok:
        warnings.append(
            f"delta advisory: delta={run.delta:g} exceeds ceiling -log(rho_hat)/2={delta_report.ceiling:.6g}"
        )
    if not delta_report.sequence_ok:
        warnings.append(
            f"delta advisory: n rho^n e^(2 delta n) > 1 at n={[v[0] for v in delta_report.violations]}"
        )
    rows = []
    guard_tripped = False
    for n in run.n_values:
        n = int(n)
        delta_n = math.exp(-run.delta * n)
        spectral = rho_smooth_spectral(
            cs.f0, tau, g, run.a, rr.xi, run.delta, n, chi, run.quad, mu=cs.mu
        )
        asym_ind = asymptote(rr, run.delta, n, mode="indicator")
        asym_smooth = asymptote(rr, run.delta, n, mode="smooth", chi=chi)
        try:
            exact = rho_exact(
                cs.mu, tau, g, run.a, run.delta, n,
                guard=run.guard, snap=run.snap, threads=run.threads,
            )
            smooth = rho_smooth_direct(
                cs.mu, tau, g, run.a, run.delta, n, chi,
                guard=run.guard, threads=run.threads,
            )
            rho_e: float | None = exact.value
            rho_s: float | None = smooth
            hits: int | None = exact.boundary_hits
            wc: int | None = exact.word_count
        except TooLarge as err:
            guard_tripped = True
            warnings.append(f"guard trip at n={n}: {err}; spectral value only")
            rho_e = rho_s = None
            hits = wc = None
        T_n = n * rr.mean_tau
        w_form = delta_n * math.exp(rr.gamma * T_n) / math.sqrt(T_n)
        rows.append(
            LdpRow(
                n=n,
                delta_n=delta_n,
                rho_exact=rho_e,
                rho_smooth_direct=rho_s,
                rho_smooth_spectral=spectral.value,
                asymptote_indicator=asym_ind,
                asymptote_smooth=asym_smooth,
                ratio_exact=None if rho_e is None else rho_e / asym_ind,
                ratio_smooth=None if rho_s is None else rho_s / asym_smooth,
                T_n=T_n,
                w_form=w_form,
                boundary_hits=hits,
                word_count=wc,
                imag_residue=spectral.imag_residue,
                tail_fraction=spectral.tail_fraction,
            )
        )
        if spectral.tail_fraction > 1e-3:
            warnings.append(
                f"quadrature tail advisory at n={n}: {spectral.tail_fraction:.3g} of |integrand| "
                "in the outermost 5% of the u-window"
            )
    return LdpTable(
        a=run.a,
        delta=run.delta,
        chi_kind=run.chi_kind,
        rate=rr,
        lattice=lattice,
        delta_report=delta_report,
        rows=tuple(rows),
        warnings=tuple(warnings),
        guard_tripped=guard_tripped,
    )
