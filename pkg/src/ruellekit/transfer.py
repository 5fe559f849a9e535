"""Ruelle transfer operators as exact finite matrices on cylinder functions.

For a depth-m potential phi, the operator

    (L_phi v)(x) = sum over one-step preimages y of x of e^{phi(y)} v(y)

maps depth-m cylinder functions to depth-m cylinder functions, and its
action is an exact N x N matrix over the admissible m-words: the
preimages of the cylinder of x are the cylinders (j, x_0, ..., x_{m-2})
over symbols j allowed before x_0.  Everything downstream (pressure,
Gibbs weights, twisted-operator decay) reduces to linear algebra on
these matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoConvergence, NormalizationFailed, WordTooShort
from .potential import LocallyConstantPotential, birkhoff_values, combine
from .sft import (
    SubshiftSpec,
    admissible_word_list,
    block_prefix_index,
    block_suffix_index,
    block_successor_table,
    check_word,
    preimage_symbols,
    word_indexer,
)

__all__ = [
    "TransferOperatorMatrix",
    "SpectralData",
    "GibbsMeasure",
    "build_operator",
    "apply_iterated",
    "leading_eigendata",
    "normalize_potential",
    "gibbs_measure",
    "gibbs_cylinder_mass",
    "cylinder_masses",
    "expectation",
    "conjugation_identity_check",
]


@lru_cache(maxsize=None)
def _operator_structure(spec: SubshiftSpec, depth: int):
    """(rows, cols) index pairs of the nonzero entries of any depth-`depth`
    transfer matrix over this subshift."""
    words = admissible_word_list(spec, depth)
    index = word_indexer(spec, depth)
    rows = []
    cols = []
    for i, x in enumerate(words):
        for j in preimage_symbols(spec, x[0]):
            y = (j,) + x[: depth - 1]
            rows.append(i)
            cols.append(index[y])
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)


@dataclass(frozen=True)
class TransferOperatorMatrix:
    """Matrix of L_phi acting on depth-`depth` cylinder functions.

    matrix[i, j] = e^{phi(word_j)} when word_j is a one-step preimage
    cylinder of word_i, else 0; words indexed lexicographically.
    """

    spec: SubshiftSpec
    depth: int
    potential: LocallyConstantPotential
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_operator(phi: LocallyConstantPotential) -> TransferOperatorMatrix:
    """Exact matrix of L_phi on depth-m cylinder functions, m = depth(phi)."""
    spec = phi.spec
    m = phi.depth
    rows, cols = _operator_structure(spec, m)
    n = len(admissible_word_list(spec, m))
    weights = np.exp(phi.values)
    mat = np.zeros((n, n), dtype=weights.dtype)
    mat[rows, cols] = weights[cols]
    return TransferOperatorMatrix(spec=spec, depth=m, potential=phi, matrix=mat)


def apply_iterated(op: TransferOperatorMatrix, h: np.ndarray, m_iters: int) -> np.ndarray:
    """L^m h by repeated matrix-vector products; m_iters = 0 returns h."""
    if m_iters < 0:
        raise ValueError(f"m_iters must be >= 0, got {m_iters}")
    v = np.asarray(h)
    if v.shape[0] != op.dim:
        raise ValueError(f"vector of length {v.shape[0]} against operator of dim {op.dim}")
    v = v.astype(np.result_type(v.dtype, op.matrix.dtype), copy=True)
    for _ in range(m_iters):
        v = op.matrix @ v
    return v


@dataclass(frozen=True)
class SpectralData:
    """Leading eigendata of a nonnegative transfer matrix.

    lam is the spectral radius, h the right eigenfunction, nu_hat the
    left eigenvector normalized to a probability vector, with the
    pairing sum(h * nu_hat) = 1.
    """

    spec: SubshiftSpec
    depth: int
    lam: float
    pressure: float
    h: np.ndarray
    nu_hat: np.ndarray
    residual: float
    iterations: int


def leading_eigendata(op: TransferOperatorMatrix, tol: float = 1e-12) -> SpectralData:
    """Two-sided power iteration for the Perron eigendata of L_phi.

    Requires a real nonnegative matrix (real potential).  Iterates the
    matrix and its transpose with l1 renormalization each step; the
    mixed Rayleigh quotient u.(Mv)/u.v supplies the eigenvalue estimate.
    Raises NoConvergence if the eigen-equation residuals do not fall
    below tol within 100 * dim * log(dim) iterations.
    """
    M = op.matrix
    if M.dtype.kind == "c":
        raise ValueError("leading eigendata is defined for real nonnegative matrices")
    if (M < 0).any():
        raise ValueError("transfer matrix must be nonnegative")
    n = op.dim
    max_iters = int(100 * n * max(1.0, math.log(n))) + 100
    # Shift by c*I: the Perron vectors are unchanged while any
    # near-periodic eigenvalue pair (lam, -lam) that would stall plain
    # power iteration is split apart.  The eigen-equation residual of
    # the shifted matrix equals that of the original.  c must sit at the
    # scale of lam itself: row sums of M^8 bound lam within n^(1/8), and
    # normalizing by the max entry keeps the squarings overflow-free.
    top = float(M.max())
    shift = 0.0
    if top > 0.0:
        Mn = M / top
        M8 = Mn @ Mn
        M8 = M8 @ M8
        M8 = M8 @ M8
        est = float(M8.sum(axis=1).max()) ** 0.125 * top
        if math.isfinite(est) and est > 0.0:
            shift = 0.25 * est
    Ms = M + shift * np.eye(n)
    MsT = Ms.T.copy()
    v = np.full(n, 1.0 / n)
    u = np.full(n, 1.0 / n)
    lam = 1.0
    residual = np.inf
    for it in range(1, max_iters + 1):
        Mv = Ms @ v
        Mu = MsT @ u
        lam_s = float((u @ Mv) / (u @ v))
        lam = lam_s - shift
        scale = max(lam, np.finfo(float).tiny)
        r_right = float(np.abs(Mv - lam_s * v).max() / max(np.abs(v).max(), 1e-300))
        r_left = float(np.abs(Mu - lam_s * u).max() / max(np.abs(u).max(), 1e-300))
        residual = max(r_right, r_left) / scale
        v = Mv / Mv.sum()
        u = Mu / Mu.sum()
        if residual <= tol:
            break
    else:
        raise NoConvergence(residual, max_iters)
    nu_hat = u / u.sum()
    h = v / float(v @ nu_hat)
    return SpectralData(
        spec=op.spec,
        depth=op.depth,
        lam=lam,
        pressure=math.log(lam),
        h=h,
        nu_hat=nu_hat,
        residual=residual,
        iterations=it,
    )


def normalize_potential(
    f: LocallyConstantPotential,
    spectral: SpectralData | None = None,
    *,
    tol: float = 1e-12,
) -> LocallyConstantPotential:
    """The normalized potential f + log h - log h(sigma .) - log lambda.

    Lives one level deeper than f (the h(sigma x) term looks one symbol
    ahead); its operator satisfies L 1 = 1 and has pressure 0.  The
    identity is verified to 10 * tol and NormalizationFailed is raised
    otherwise.
    """
    if spectral is None:
        spectral = leading_eigendata(build_operator(f), tol=tol)
    if spectral.spec != f.spec or spectral.depth != f.depth:
        raise ValueError("spectral data does not match the potential")
    spec = f.spec
    m = f.depth
    log_h = np.log(spectral.h)
    prefix = block_prefix_index(spec, m + 1, m)
    suffix = block_suffix_index(spec, m + 1, m)
    vals = f.values[prefix] + log_h[prefix] - log_h[suffix] - spectral.pressure
    f0 = LocallyConstantPotential(spec=spec, depth=m + 1, values=vals, kind="normalized")
    ones = np.ones(len(admissible_word_list(spec, m + 1)))
    err = float(np.abs(build_operator(f0).matrix @ ones - ones).max())
    allowed = 10.0 * max(tol, spectral.residual)
    if err > allowed:
        raise NormalizationFailed(
            f"L 1 deviates from 1 by {err:.3e} (allowed {allowed:.3e})"
        )
    return f0


@dataclass(frozen=True)
class GibbsMeasure:
    """Gibbs measure of a depth-m potential as a stationary m-block chain.

    initial[w] is the measure of the m-cylinder [w]; transition[w, w']
    moves the block window one symbol to the right.  Cylinder masses of
    any length come from initial * product of transitions.
    """

    spec: SubshiftSpec
    depth: int
    initial: np.ndarray
    transition: np.ndarray
    stationarity_defect: float


def gibbs_measure(
    spectral: SpectralData,
    phi: LocallyConstantPotential,
    *,
    check_tol: float = 1e-9,
) -> GibbsMeasure:
    """Block-chain form of the Gibbs measure of phi.

    initial = h * nu_hat (the eigenfunction times the eigenmeasure) and
    transition(w -> w') = e^{phi(w)} nu_hat(w') / (lambda nu_hat(w)) for
    the k admissible one-symbol extensions.  Rows are renormalized to
    remove the eigensolver's residual drift, and stationarity of the
    initial vector is checked rather than assumed.
    """
    if spectral.spec != phi.spec or spectral.depth != phi.depth:
        raise ValueError("spectral data does not match the potential")
    spec = phi.spec
    m = phi.depth
    succ = block_successor_table(spec, m)
    n = succ.shape[0]
    pi = spectral.h * spectral.nu_hat
    pi = pi / pi.sum()
    T = np.zeros((n, n))
    weight = np.exp(phi.values) / (spectral.lam * spectral.nu_hat)
    for j in range(spec.k):
        valid = succ[:, j] >= 0
        src = np.nonzero(valid)[0]
        dst = succ[src, j]
        T[src, dst] = weight[src] * spectral.nu_hat[dst]
    T /= T.sum(axis=1, keepdims=True)
    defect = float(np.abs(pi @ T - pi).sum())
    if defect > check_tol:
        raise NormalizationFailed(
            f"block chain stationarity defect {defect:.3e} exceeds {check_tol:.3e}"
        )
    return GibbsMeasure(
        spec=spec, depth=m, initial=pi, transition=T, stationarity_defect=defect
    )


def gibbs_cylinder_mass(mu: GibbsMeasure, w) -> float:
    """Measure of the cylinder [w] for len(w) >= depth(mu)."""
    w = check_word(mu.spec, w)
    m = mu.depth
    if len(w) < m:
        raise WordTooShort(f"cylinder word must have length >= {m}, got {len(w)}")
    index = word_indexer(mu.spec, m)
    s = index[w[:m]]
    mass = float(mu.initial[s])
    for i in range(len(w) - m):
        s_next = index[w[i + 1 : i + 1 + m]]
        mass *= mu.transition[s, s_next]
        s = s_next
    return mass


def cylinder_masses(mu: GibbsMeasure, length: int) -> np.ndarray:
    """Masses of all admissible `length`-cylinders, lexicographic order."""
    m = mu.depth
    if length < m:
        raise WordTooShort(f"length must be >= chain depth {m}")
    masses = mu.initial.copy()
    for ell in range(m, length):
        parent = block_prefix_index(mu.spec, ell + 1, ell)
        tail_prev = block_suffix_index(mu.spec, ell, m)[parent]
        tail_new = block_suffix_index(mu.spec, ell + 1, m)
        masses = masses[parent] * mu.transition[tail_prev, tail_new]
    return masses


def expectation(mu: GibbsMeasure, psi: LocallyConstantPotential):
    """Integral of psi against the Gibbs measure."""
    if psi.spec != mu.spec:
        raise ValueError("observable lives on a different subshift")
    length = max(psi.depth, mu.depth)
    masses = cylinder_masses(mu, length)
    return (masses * psi.at_depth(length).values).sum()


def conjugation_identity_check(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    a: float,
    b: float,
    P: float,
    h: LocallyConstantPotential,
    m_iters: int,
) -> float:
    """Max deviation in L^m_{f-(a+ib)tau} h = L^m_{f-(P+a+ib)tau}(e^{P tau^m} h).

    Shifting the multiplier of the roof by P is exactly compensated by
    the Birkhoff weight e^{P tau^m}; the identity holds entrywise on the
    matrix representation, so the deviation is pure roundoff.
    """
    if m_iters < 0:
        raise ValueError(f"m_iters must be >= 0, got {m_iters}")
    s = complex(a, b)
    depth = max(f.depth, tau.depth, h.depth)
    if m_iters > 0:
        depth = max(depth, m_iters + tau.depth - 1)
    phi_plain = combine(f, tau, LocallyConstantPotential.zero(f.spec), s=s).at_depth(depth)
    phi_shift = combine(f, tau, LocallyConstantPotential.zero(f.spec), s=P + s).at_depth(depth)
    v = h.at_depth(depth).values
    lhs = apply_iterated(build_operator(phi_plain), v, m_iters)
    mult = np.exp(P * birkhoff_values(tau, depth, m_iters))
    rhs = apply_iterated(build_operator(phi_shift), mult * v, m_iters)
    return float(np.abs(lhs - rhs).max())
