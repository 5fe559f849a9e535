"""Config parsing, experiment orchestration, and deterministic CSV output.

Configs are TOML (grammar documented in the README): a [system] block
with the transition matrix and metric, [potentials.f/tau/g] tables
mapping words (digit strings) to values written as decimal strings so
they parse to exactly one double, and per-command run blocks.  Every
CSV row echoes the config hash; floats are printed with 17 significant
digits so output is byte-stable and round-trips exactly.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 guard
trip with partial output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import (
    BracketFailure,
    LatticeDegenerate,
    NoConvergence,
    NormalizationFailed,
    OutOfRange,
    ParseError,
    QuadratureUnderresolved,
    RuellekitError,
    ValidationError,
)
from .ldp import LdpRunSpec, QuadratureSpec, build_ldp_table
from .potential import LocallyConstantPotential
from .pressure import (
    PressureCurve,
    beta_prime,
    center_and_normalize,
    pressure_flow,
    pressure_sigma,
    rate_J,
)
from .scan import ScanConfig, envelope_report, two_parameter_sweep
from .sft import SubshiftSpec, ThetaMetric, validate_subshift
from .transfer import build_operator, leading_eigendata

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "parse_config",
    "cmd_pressure",
    "cmd_rates",
    "cmd_ldp",
    "cmd_scan",
    "main",
    "builtin_config_path",
]


def builtin_config_path(name: str) -> Path:
    """Path of a shipped example config (name without .toml)."""
    here = Path(__file__).parent / "configs"
    path = here / f"{name}.toml"
    if not path.exists():
        available = sorted(p.stem for p in here.glob("*.toml"))
        raise FileNotFoundError(f"no builtin config {name!r}; available: {available}")
    return path


@dataclass(frozen=True)
class RatesBlock:
    a_grid: tuple
    t_max: float = 30.0


@dataclass(frozen=True)
class LdpBlock:
    a: float
    delta: float
    n_min: int
    n_max: int
    n_step: int = 1
    chi: str = "triangle"
    quad_u_max: float = 200.0
    quad_step: float = 0.01
    quad_rel_tol: float = 1e-6
    guard: float = 1e8
    lattice_u_grid: tuple = (0.5, 1.0, 2.0, math.pi, 2.0 * math.pi, 8.0)
    lattice_iters: int = 200

    @property
    def n_values(self) -> tuple:
        return tuple(range(self.n_min, self.n_max + 1, self.n_step))


@dataclass(frozen=True)
class ScanBlock:
    b_grid: tuple
    kappa_grid: tuple
    a: float = 0.0
    c: float = 0.0
    B: float = 1.0
    m_max: int = 60
    epsilon: float = 0.5
    h_seed: str = "constant_one"
    seed: int = 20240814


@dataclass(frozen=True)
class ToleranceBlock:
    eigen_tol: float = 1e-12
    root_tol: float = 1e-10
    xi_tol: float = 1e-8
    fd_step: float = 1e-3
    lattice_tol: float = 1e-6
    gibbs_tol: float = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    path: str
    sha256: str
    spec: SubshiftSpec
    metric: ThetaMetric
    depth: int
    f: LocallyConstantPotential
    tau: LocallyConstantPotential
    g: LocallyConstantPotential
    rates: RatesBlock | None
    ldp: LdpBlock | None
    scan: ScanBlock | None
    tolerances: ToleranceBlock

    @property
    def short_hash(self) -> str:
        return self.sha256[:12]


def _as_float(value, where: str) -> float:
    """Config numbers may be written as decimal strings for exactness."""
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError as err:
            raise ValidationError(f"{where}: cannot parse {value!r} as a decimal") from err
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number or decimal string, got {value!r}")
    return float(value)


def _parse_potential(
    spec: SubshiftSpec, table: dict, name: str, kind: str
) -> LocallyConstantPotential:
    if not isinstance(table, dict) or not table:
        raise ValidationError(f"potentials.{name}: expected a nonempty word -> value table")
    parsed = {}
    for key, raw in table.items():
        if not isinstance(key, str) or not key or not all(c.isdigit() for c in key):
            raise ValidationError(
                f"potentials.{name}: word keys must be digit strings, got {key!r}"
            )
        word = tuple(int(c) for c in key)
        for i, x in enumerate(word):
            if x >= spec.k:
                raise ValidationError(
                    f"potentials.{name}: word {key!r} uses symbol {x} outside alphabet"
                )
        for i in range(len(word) - 1):
            if not spec.allows(word[i], word[i + 1]):
                raise ValidationError(
                    f"potentials.{name}: word admissibility: {key!r} has forbidden "
                    f"transition {word[i]} -> {word[i + 1]}"
                )
        parsed[word] = _as_float(raw, f"potentials.{name}[{key!r}]")
    try:
        return LocallyConstantPotential.from_table(spec, parsed, kind=kind)
    except ValueError as err:
        raise ValidationError(f"potentials.{name}: table coverage: {err}") from err


def _check_sorted(values, where: str) -> tuple:
    vals = tuple(values)
    if any(vals[i] >= vals[i + 1] for i in range(len(vals) - 1)):
        raise ValidationError(f"{where}: grids sorted: values must be strictly increasing")
    return vals


def parse_config(path) -> ExperimentConfig:
    """Load and fully validate an experiment config.

    Raises ParseError for malformed TOML and ValidationError (naming the
    violated invariant) for well-formed but inconsistent configs.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"config file not found: {path}")
    raw = path.read_bytes()
    sha = hashlib.sha256(raw).hexdigest()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as err:
        raise ParseError(f"{path}: {err}") from err

    system = data.get("system")
    if not isinstance(system, dict):
        raise ValidationError("missing [system] block")
    transitions = system.get("transitions")
    if transitions is None:
        raise ValidationError("system.transitions missing")
    try:
        spec = SubshiftSpec.from_matrix(transitions)
    except ValueError as err:
        raise ValidationError(f"system.transitions: {err}") from err
    if "k" in system and int(system["k"]) != spec.k:
        raise ValidationError(
            f"system.k = {system['k']} does not match transition matrix size {spec.k}"
        )
    try:
        validate_subshift(spec)
    except RuellekitError as err:
        raise ValidationError(f"{type(err).__name__}: {err}") from err
    theta = _as_float(system.get("theta", 0.5), "system.theta")
    try:
        metric = ThetaMetric(theta)
    except ValueError as err:
        raise ValidationError(f"system.theta: {err}") from err

    pots = data.get("potentials")
    if not isinstance(pots, dict):
        raise ValidationError("missing [potentials] block")
    for name in ("f", "tau", "g"):
        if name not in pots:
            raise ValidationError(f"potentials.{name} missing")
    f = _parse_potential(spec, pots["f"], "f", kind="generic")
    tau = _parse_potential(spec, pots["tau"], "tau", kind="roof")
    g = _parse_potential(spec, pots["g"], "g", kind="observable")
    if (tau.values <= 0).any():
        raise ValidationError("roof positivity: tau must be strictly positive")
    native_depth = max(f.depth, tau.depth, g.depth)
    depth = int(system.get("depth", native_depth))
    if depth < native_depth:
        raise ValidationError(
            f"system.depth = {depth} is shallower than the deepest potential table ({native_depth})"
        )

    rates = None
    if "rates" in data:
        block = data["rates"]
        grid = block.get("a_grid")
        if not isinstance(grid, list) or not grid:
            raise ValidationError("rates.a_grid: expected a nonempty list")
        a_grid = _check_sorted(
            (_as_float(v, "rates.a_grid") for v in grid), "rates.a_grid"
        )
        rates = RatesBlock(a_grid=a_grid, t_max=_as_float(block.get("t_max", 30.0), "rates.t_max"))

    ldp = None
    if "ldp" in data:
        block = data["ldp"]
        for key in ("a", "delta", "n_min", "n_max"):
            if key not in block:
                raise ValidationError(f"ldp.{key} missing")
        n_min = int(block["n_min"])
        n_max = int(block["n_max"])
        n_step = int(block.get("n_step", 1))
        if n_min < 1 or n_max < n_min or n_step < 1:
            raise ValidationError("ldp n-range: need 1 <= n_min <= n_max and n_step >= 1")
        chi = str(block.get("chi", "triangle"))
        if chi not in ("triangle", "smooth_bump"):
            raise ValidationError(f"ldp.chi: unknown cutoff kind {chi!r}")
        lattice_grid = block.get(
            "lattice_u_grid", [0.5, 1.0, 2.0, math.pi, 2.0 * math.pi, 8.0]
        )
        ldp = LdpBlock(
            a=_as_float(block["a"], "ldp.a"),
            delta=_as_float(block["delta"], "ldp.delta"),
            n_min=n_min,
            n_max=n_max,
            n_step=n_step,
            chi=chi,
            quad_u_max=_as_float(block.get("quad_u_max", 200.0), "ldp.quad_u_max"),
            quad_step=_as_float(block.get("quad_step", 0.01), "ldp.quad_step"),
            quad_rel_tol=_as_float(block.get("quad_rel_tol", 1e-6), "ldp.quad_rel_tol"),
            guard=_as_float(block.get("guard", 1e8), "ldp.guard"),
            lattice_u_grid=tuple(_as_float(u, "ldp.lattice_u_grid") for u in lattice_grid),
            lattice_iters=int(block.get("lattice_iters", 200)),
        )
        if ldp.quad_step <= 0 or ldp.quad_u_max <= 0:
            raise ValidationError("ldp quadrature: u_max and step must be positive")

    scan = None
    if "scan" in data:
        block = data["scan"]
        b_grid = block.get("b_grid")
        kappa_grid = block.get("kappa_grid")
        if not isinstance(b_grid, list) or not b_grid:
            raise ValidationError("scan.b_grid: expected a nonempty list")
        if not isinstance(kappa_grid, list) or not kappa_grid:
            raise ValidationError("scan.kappa_grid: expected a nonempty list")
        scan = ScanBlock(
            b_grid=_check_sorted((_as_float(b, "scan.b_grid") for b in b_grid), "scan.b_grid"),
            kappa_grid=_check_sorted(
                (_as_float(k, "scan.kappa_grid") for k in kappa_grid), "scan.kappa_grid"
            ),
            a=_as_float(block.get("a", 0.0), "scan.a"),
            c=_as_float(block.get("c", 0.0), "scan.c"),
            B=_as_float(block.get("B", 1.0), "scan.B"),
            m_max=int(block.get("m_max", 60)),
            epsilon=_as_float(block.get("epsilon", 0.5), "scan.epsilon"),
            h_seed=str(block.get("h_seed", "constant_one")),
            seed=int(block.get("seed", 20240814)),
        )
        if any(abs(b) < 1.0 for b in scan.b_grid):
            raise ValidationError("scan.b_grid: b values must satisfy |b| >= 1")
        if any(abs(k) > scan.B + 1e-12 for k in scan.kappa_grid):
            raise ValidationError("scan.kappa_grid: |kappa| <= B violated")

    tol_block = data.get("tolerances", {})
    tolerances = ToleranceBlock(
        eigen_tol=_as_float(tol_block.get("eigen_tol", 1e-12), "tolerances.eigen_tol"),
        root_tol=_as_float(tol_block.get("root_tol", 1e-10), "tolerances.root_tol"),
        xi_tol=_as_float(tol_block.get("xi_tol", 1e-8), "tolerances.xi_tol"),
        fd_step=_as_float(tol_block.get("fd_step", 1e-3), "tolerances.fd_step"),
        lattice_tol=_as_float(tol_block.get("lattice_tol", 1e-6), "tolerances.lattice_tol"),
        gibbs_tol=_as_float(tol_block.get("gibbs_tol", 1e-9), "tolerances.gibbs_tol"),
    )

    return ExperimentConfig(
        path=str(path),
        sha256=sha,
        spec=spec,
        metric=metric,
        depth=depth,
        f=f,
        tau=tau,
        g=g,
        rates=rates,
        ldp=ldp,
        scan=scan,
        tolerances=tolerances,
    )


# ---------------------------------------------------------------------------
# Output helpers

@dataclass
class RunManifest:
    command: str
    config: str
    config_sha256: str
    toolkit_version: str
    stages: dict
    warnings: list
    extra: dict

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "config": self.config,
            "config_sha256": self.config_sha256,
            "toolkit_version": self.toolkit_version,
            "stages_seconds": self.stages,
            "warnings": self.warnings,
        }
        payload.update(self.extra)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    """Fixed CSV cell format: 17 significant digits for floats."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _csv_text(command: str, cfg: ExperimentConfig, warnings, columns, rows) -> str:
    lines = [
        f"# ruellekit {__version__}",
        f"# command: {command}",
        f"# config: {Path(cfg.path).name}",
        f"# config_sha256: {cfg.sha256}",
    ]
    for w in warnings:
        lines.append(f"# warning: {w}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class _StageClock:
    def __init__(self):
        self.stages = {}
        self._t0 = time.perf_counter()
        self._label = None

    def stage(self, label: str):
        self._finish()
        self._label = label
        self._t0 = time.perf_counter()

    def _finish(self):
        if self._label is not None:
            self.stages[self._label] = time.perf_counter() - self._t0
            self._label = None

    def done(self) -> dict:
        self._finish()
        return self.stages


# ---------------------------------------------------------------------------
# Commands.  Each returns (csv_text, manifest, exit_code).

def cmd_pressure(cfg: ExperimentConfig):
    clock = _StageClock()
    tol = cfg.tolerances
    clock.stage("pressure")
    P_f = pressure_sigma(cfg.f, eigen_tol=tol.eigen_tol)
    flow = pressure_flow(cfg.f, cfg.tau, cfg.g, 0.0, root_tol=tol.root_tol, eigen_tol=tol.eigen_tol)
    clock.stage("normalize")
    cs = center_and_normalize(cfg.f, cfg.tau, cfg.g, root_tol=tol.root_tol, eigen_tol=tol.eigen_tol)
    P_norm = pressure_sigma(cs.f0, eigen_tol=tol.eigen_tol)
    clock.stage("range")
    a_star = beta_prime(cs.curve, 0.0)
    t_max = cfg.rates.t_max if cfg.rates else 30.0
    a_min = beta_prime(cs.curve, -t_max)
    a_max = beta_prime(cs.curve, t_max)
    warnings: list[str] = []
    columns = (
        "pressure_f", "flow_pressure", "a_star", "a_min", "a_max",
        "pressure_normalized", "config_hash",
    )
    rows = [(P_f, flow, a_star, a_min, a_max, P_norm, cfg.short_hash)]
    csv_text = _csv_text("pressure", cfg, warnings, columns, rows)
    manifest = RunManifest(
        command="pressure",
        config=Path(cfg.path).name,
        config_sha256=cfg.sha256,
        toolkit_version=__version__,
        stages=clock.done(),
        warnings=warnings,
        extra={
            "pressure_f": P_f,
            "flow_pressure": flow,
            "a_star": a_star,
            "achievable_range": [a_min, a_max],
            "pressure_normalized": P_norm,
        },
    )
    return csv_text, manifest, 0


def cmd_rates(cfg: ExperimentConfig):
    if cfg.rates is None:
        raise ValidationError("config has no [rates] block")
    clock = _StageClock()
    tol = cfg.tolerances
    warnings: list[str] = []
    clock.stage("grid")
    reports: list = []
    for a in cfg.rates.a_grid:
        try:
            rr = rate_J(
                cfg.f, cfg.tau, cfg.g, a,
                t_max=cfg.rates.t_max, xi_tol=tol.xi_tol,
                root_tol=tol.root_tol, eigen_tol=tol.eigen_tol,
            )
            reports.append(rr)
        except (OutOfRange, LatticeDegenerate) as err:
            warnings.append(f"a={a!r}: {type(err).__name__}: {err}")
            reports.append(type(err).__name__)
    clock.stage("assemble")
    grid = cfg.rates.a_grid
    rows = []
    for i, rr in enumerate(reports):
        if isinstance(rr, str):
            rows.append((grid[i], None, None, None, None, None, None, None, rr, cfg.short_hash))
            continue
        prev_ok = i > 0 and not isinstance(reports[i - 1], str)
        next_ok = i + 1 < len(reports) and not isinstance(reports[i + 1], str)
        if prev_ok and next_ok:
            dgamma = (reports[i + 1].gamma - reports[i - 1].gamma) / (grid[i + 1] - grid[i - 1])
            gp_plus_xi = dgamma + rr.xi
        else:
            gp_plus_xi = None
        rows.append(
            (
                rr.a, rr.xi, rr.J, rr.gamma, rr.omega, rr.mean_tau,
                abs(rr.J - rr.gamma * rr.mean_tau),
                gp_plus_xi,
                "",
                cfg.short_hash,
            )
        )
    columns = (
        "a", "xi", "J", "gamma", "omega", "mean_tau",
        "J_minus_gamma_meantau", "gamma_prime_plus_xi", "error", "config_hash",
    )
    csv_text = _csv_text("rates", cfg, warnings, columns, rows)
    ok = [r for r in reports if not isinstance(r, str)]
    manifest = RunManifest(
        command="rates",
        config=Path(cfg.path).name,
        config_sha256=cfg.sha256,
        toolkit_version=__version__,
        stages=clock.done(),
        warnings=warnings,
        extra={
            "rows": len(rows),
            "rows_in_range": len(ok),
            "a_star": ok[0].a_star if ok else None,
            "max_identity_residual": max(
                (abs(r.J - r.gamma * r.mean_tau) for r in ok), default=None
            ),
        },
    )
    return csv_text, manifest, 0


def cmd_ldp(cfg: ExperimentConfig, threads: int = 1):
    if cfg.ldp is None:
        raise ValidationError("config has no [ldp] block")
    clock = _StageClock()
    tol = cfg.tolerances
    block = cfg.ldp
    run = LdpRunSpec(
        a=block.a,
        delta=block.delta,
        n_values=block.n_values,
        chi_kind=block.chi,
        quad=QuadratureSpec(
            u_max=block.quad_u_max, step=block.quad_step, rel_tol=block.quad_rel_tol
        ),
        guard=block.guard,
        lattice_u_grid=block.lattice_u_grid,
        lattice_iters=block.lattice_iters,
        lattice_tol=tol.lattice_tol,
        threads=threads,
        eigen_tol=tol.eigen_tol,
        root_tol=tol.root_tol,
        xi_tol=tol.xi_tol,
    )
    clock.stage("table")
    table = build_ldp_table(cfg.f, cfg.tau, cfg.g, run)
    clock.stage("assemble")
    columns = (
        "n", "delta_n", "rho_exact", "rho_smooth_direct", "rho_smooth_spectral",
        "asymptote_indicator", "asymptote_smooth", "ratio_exact", "ratio_smooth",
        "T_n", "w_form", "boundary_hits", "word_count", "config_hash",
    )
    rows = [
        (
            r.n, r.delta_n, r.rho_exact, r.rho_smooth_direct, r.rho_smooth_spectral,
            r.asymptote_indicator, r.asymptote_smooth, r.ratio_exact, r.ratio_smooth,
            r.T_n, r.w_form, r.boundary_hits, r.word_count, cfg.short_hash,
        )
        for r in table.rows
    ]
    csv_text = _csv_text("ldp", cfg, table.warnings, columns, rows)
    rr = table.rate
    manifest = RunManifest(
        command="ldp",
        config=Path(cfg.path).name,
        config_sha256=cfg.sha256,
        toolkit_version=__version__,
        stages=clock.done(),
        warnings=list(table.warnings),
        extra={
            "a": table.a,
            "delta": table.delta,
            "chi": table.chi_kind,
            "rate_report": {
                "a_star": rr.a_star,
                "xi": rr.xi,
                "J": rr.J,
                "gamma": rr.gamma,
                "omega": rr.omega,
                "mean_tau": rr.mean_tau,
                "diagnostics": {k: float(v) for k, v in rr.diagnostics.items()},
            },
            "lattice": {
                "flagged": table.lattice.flagged,
                "max_r": table.lattice.max_r,
                "argmax_u": table.lattice.argmax_u,
                "u_grid": list(map(float, table.lattice.u_grid)),
                "r_values": list(map(float, table.lattice.r_values)),
            },
            "delta_advisory": {
                "ceiling": table.delta_report.ceiling,
                "delta_ok": table.delta_report.delta_ok,
                "sequence_ok": table.delta_report.sequence_ok,
            },
            "max_imag_residue": max((r.imag_residue for r in table.rows), default=None),
            "guard_tripped": table.guard_tripped,
        },
    )
    return csv_text, manifest, 3 if table.guard_tripped else 0


def cmd_scan(cfg: ExperimentConfig):
    if cfg.scan is None:
        raise ValidationError("config has no [scan] block")
    clock = _StageClock()
    block = cfg.scan
    clock.stage("sweep")
    scan_cfg = ScanConfig(
        f=cfg.f,
        tau=cfg.tau,
        g=cfg.g,
        metric=cfg.metric,
        b_grid=block.b_grid,
        kappa_grid=block.kappa_grid,
        a=block.a,
        c=block.c,
        B=block.B,
        m_max=block.m_max,
        h_seed=block.h_seed,
        seed=block.seed,
        epsilon=block.epsilon,
    )
    sweep = two_parameter_sweep(scan_cfg)
    clock.stage("envelope")
    envelopes = {}
    warnings: list[str] = []
    for j, kappa in enumerate(sweep.kappa_grid):
        fits_j = [sweep.fits[i][j] for i in range(len(sweep.b_grid))]
        rep = envelope_report(fits_j, block.epsilon)
        envelopes[kappa] = rep
        if rep.flagged:
            warnings.append(f"envelope kappa={kappa:g}: {rep.note}")
    columns = ("b", "kappa", "w", "rho_hat", "fit_residual", "config_hash")
    rows = []
    for i, b in enumerate(sweep.b_grid):
        for j, kappa in enumerate(sweep.kappa_grid):
            fit = sweep.fits[i][j]
            rows.append((b, kappa, fit.w, fit.rho_hat, fit.residual, cfg.short_hash))
    csv_text = _csv_text("scan", cfg, warnings, columns, rows)
    manifest = RunManifest(
        command="scan",
        config=Path(cfg.path).name,
        config_sha256=cfg.sha256,
        toolkit_version=__version__,
        stages=clock.done(),
        warnings=warnings,
        extra={
            "max_rho": sweep.max_rho,
            "envelopes": {
                f"kappa={k:g}": {
                    "rho_global": rep.rho_global,
                    "C": rep.C,
                    "e_fit": rep.e_fit,
                    "lattice_like": rep.lattice_like,
                    "flagged": rep.flagged,
                    "note": rep.note,
                }
                for k, rep in envelopes.items()
            },
        },
    )
    return csv_text, manifest, 0


_COMMANDS = {
    "pressure": cmd_pressure,
    "rates": cmd_rates,
    "ldp": cmd_ldp,
    "scan": cmd_scan,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ruellekit",
        description="Transfer-operator pressure, rate-function, and sharp-LDP experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a TOML experiment config")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for enumeration (default: THREADS env or 1)")
    args = parser.parse_args(argv)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("THREADS", "1"))
    threads = max(1, threads)
    try:
        cfg = parse_config(args.config)
    except (ParseError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        if args.command == "ldp":
            csv_text, manifest, code = cmd_ldp(cfg, threads=threads)
        else:
            csv_text, manifest, code = _COMMANDS[args.command](cfg)
    except (ParseError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (
        NoConvergence,
        BracketFailure,
        NormalizationFailed,
        QuadratureUnderresolved,
        OutOfRange,
        LatticeDegenerate,
        FloatingPointError,
    ) as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{args.command}.csv"
    csv_path.write_text(csv_text, encoding="utf-8")
    manifest_path = out_dir / f"{args.command}_manifest.json"
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    if args.command == "pressure":
        sys.stdout.write(csv_text)
    else:
        print(f"wrote {csv_path} ({len(csv_text.splitlines())} lines) and {manifest_path.name}")
    for w in manifest.warnings:
        print(f"warning: {w}")
    return code


if __name__ == "__main__":
    sys.exit(main())
