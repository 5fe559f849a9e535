"""Transfer-operator toolkit for subshifts of finite type.

Exact finite-rank Ruelle operators on cylinder functions, Gibbs
measures, pressure and rate functions for suspension flows, sharp
large-deviation window probabilities with spectral cross-checks, and
complex-parameter decay scans.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BadFrequency,
    BracketFailure,
    EmptyRowOrColumn,
    LatticeDegenerate,
    NoConvergence,
    NormalizationFailed,
    NotIrreducibleAperiodic,
    OutOfRange,
    ParseError,
    QuadratureUnderresolved,
    RuellekitError,
    SpecMismatch,
    TooLarge,
    ValidationError,
    WordTooShort,
)
from .sft import (
    SubshiftSpec,
    ThetaMetric,
    admissible_words,
    birkhoff_sum,
    canonical_extension,
    check_word,
    count_admissible_words,
    validate_subshift,
)
from .potential import (
    LocallyConstantPotential,
    NormBundle,
    combine,
    depth_truncate,
    holder_seminorm,
    norm_beta_b,
)
from .transfer import (
    GibbsMeasure,
    SpectralData,
    TransferOperatorMatrix,
    apply_iterated,
    build_operator,
    conjugation_identity_check,
    cylinder_masses,
    expectation,
    gibbs_measure,
    leading_eigendata,
    normalize_potential,
)
from .pressure import (
    CenteredSystem,
    LatticeReport,
    PressureCurve,
    RateReport,
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
from .ldp import (
    CutoffFunction,
    LdpRow,
    LdpRunSpec,
    LdpTable,
    QuadratureSpec,
    SpectralWindow,
    WindowMass,
    asymptote,
    build_ldp_table,
    cutoff,
    delta_constraint_check,
    rho_exact,
    rho_smooth_direct,
    rho_smooth_spectral,
)
from .scan import (
    DecayFit,
    EnvelopeReport,
    ScanConfig,
    SweepResult,
    decay_sequence,
    envelope_report,
    two_parameter_sweep,
)
from .cli import ExperimentConfig, builtin_config_path, main, parse_config

__all__ = [
    "__version__",
    # errors
    "RuellekitError", "EmptyRowOrColumn", "NotIrreducibleAperiodic", "WordTooShort",
    "SpecMismatch", "BadFrequency", "NoConvergence", "NormalizationFailed",
    "BracketFailure", "OutOfRange", "LatticeDegenerate", "TooLarge",
    "QuadratureUnderresolved", "ParseError", "ValidationError",
    # sft
    "SubshiftSpec", "ThetaMetric", "validate_subshift", "admissible_words",
    "count_admissible_words", "canonical_extension", "check_word", "birkhoff_sum",
    # potential
    "LocallyConstantPotential", "combine", "depth_truncate", "holder_seminorm",
    "NormBundle", "norm_beta_b",
    # transfer
    "TransferOperatorMatrix", "build_operator", "apply_iterated", "SpectralData",
    "leading_eigendata", "normalize_potential", "GibbsMeasure", "gibbs_measure",
    "cylinder_masses", "expectation", "conjugation_identity_check",
    # pressure
    "pressure_sigma", "pressure_flow", "PressureCurve", "beta", "beta_prime",
    "variance_flow", "solve_xi", "RateReport", "rate_J", "rate_J_infimum",
    "CenteredSystem", "center_and_normalize", "LatticeReport", "lattice_check",
    # ldp
    "CutoffFunction", "cutoff", "WindowMass", "rho_exact", "rho_smooth_direct",
    "QuadratureSpec", "SpectralWindow", "rho_smooth_spectral", "asymptote",
    "delta_constraint_check", "LdpRunSpec", "LdpRow", "LdpTable", "build_ldp_table",
    # scan
    "ScanConfig", "DecayFit", "decay_sequence", "EnvelopeReport", "envelope_report",
    "SweepResult", "two_parameter_sweep",
    # cli
    "ExperimentConfig", "parse_config", "builtin_config_path", "main",
]
