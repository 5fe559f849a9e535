"""Locally constant potentials on a subshift and the norms used on them.

A depth-m potential is a function of one-sided sequences that depends
only on the first m symbols, stored as a value per admissible m-word in
lexicographic order.  Complex values are allowed throughout: the
combined potentials f - s*tau + z*g carry the imaginary frequencies of
the twisted transfer operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from numbers import Number
from typing import Callable, Mapping

import numpy as np

from .errors import BadFrequency, SpecMismatch, WordTooShort
from .sft import (
    SubshiftSpec,
    ThetaMetric,
    admissible_word_list,
    block_prefix_index,
    block_subword_index,
    canonical_extension,
    word_indexer,
)

__all__ = [
    "LocallyConstantPotential",
    "NormBundle",
    "combine",
    "depth_truncate",
    "holder_seminorm",
    "seminorm_values",
    "sup_norm_values",
    "norm_beta_b",
    "birkhoff_values",
]


@dataclass(frozen=True)
class LocallyConstantPotential:
    """A function of the first `depth` symbols, one value per admissible word.

    `values` is aligned with the lexicographic order of admissible
    depth-words; `kind` is a free-form tag ("roof", "observable", ...)
    carried for reporting only.
    """

    spec: SubshiftSpec
    depth: int
    values: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        vals = np.asarray(self.values)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(np.float64)
        n_words = len(admissible_word_list(self.spec, self.depth))
        if vals.shape != (n_words,):
            raise ValueError(
                f"expected {n_words} values for depth {self.depth}, got shape {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValueError("potential values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_table(
        cls,
        spec: SubshiftSpec,
        table: Mapping,
        kind: str = "generic",
    ) -> "LocallyConstantPotential":
        """Build from a {word: value} mapping covering exactly the admissible words.

        Keys may be tuples or digit strings ("01" means the word (0, 1)).
        """
        norm_table = {}
        for key, val in table.items():
            w = tuple(int(c) for c in key) if isinstance(key, str) else tuple(key)
            norm_table[w] = val
        depths = {len(w) for w in norm_table}
        if len(depths) != 1:
            raise ValueError(f"table keys must all have the same length, got lengths {sorted(depths)}")
        depth = depths.pop()
        words = admissible_word_list(spec, depth)
        missing = [w for w in words if w not in norm_table]
        extra = [w for w in norm_table if w not in set(words)]
        if missing or extra:
            raise ValueError(
                f"table must cover exactly the admissible {depth}-words; "
                f"missing {missing}, extraneous {extra}"
            )
        vals = np.array([norm_table[w] for w in words])
        return cls(spec=spec, depth=depth, values=vals, kind=kind)

    @classmethod
    def constant(
        cls, spec: SubshiftSpec, value, depth: int = 1, kind: str = "generic"
    ) -> "LocallyConstantPotential":
        n = len(admissible_word_list(spec, depth))
        return cls(spec=spec, depth=depth, values=np.full(n, value), kind=kind)

    @classmethod
    def zero(cls, spec: SubshiftSpec, depth: int = 1) -> "LocallyConstantPotential":
        return cls.constant(spec, 0.0, depth=depth)

    # -- evaluation ---------------------------------------------------

    def __call__(self, w):
        """Value on the cylinder of w (which may be longer than depth)."""
        w = tuple(w)
        if len(w) < self.depth:
            raise WordTooShort(
                f"word of length {len(w)} shorter than potential depth {self.depth}"
            )
        return self.values[word_indexer(self.spec, self.depth)[w[: self.depth]]]

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def real_part(self) -> "LocallyConstantPotential":
        return replace(self, values=self.values.real)

    def at_depth(self, depth: int) -> "LocallyConstantPotential":
        """Represent the same function on deeper cylinders (depth >= self.depth)."""
        if depth == self.depth:
            return self
        if depth < self.depth:
            raise ValueError(
                f"cannot lift depth-{self.depth} potential to shallower depth {depth}; "
                "use depth_truncate"
            )
        prefix = block_prefix_index(self.spec, depth, self.depth)
        return replace(self, depth=depth, values=self.values[prefix])

    # -- arithmetic (same spec; lifts to the common depth) --------------

    def _binary(self, other, op):
        if isinstance(other, LocallyConstantPotential):
            if other.spec != self.spec:
                raise SpecMismatch("potentials live on different subshifts")
            d = max(self.depth, other.depth)
            a = self.at_depth(d)
            b = other.at_depth(d)
            return LocallyConstantPotential(
                spec=self.spec, depth=d, values=op(a.values, b.values)
            )
        if isinstance(other, Number):
            return LocallyConstantPotential(
                spec=self.spec, depth=self.depth, values=op(self.values, other)
            )
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return LocallyConstantPotential(
            spec=self.spec, depth=self.depth, values=self.values * c
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


def combine(
    f: LocallyConstantPotential,
    tau: LocallyConstantPotential,
    g: LocallyConstantPotential,
    s=0.0,
    z=0.0,
) -> LocallyConstantPotential:
    """The combined potential f - s*tau + z*g at the common depth.

    s and z may be complex; the result is complex exactly when an input
    or coefficient is.
    """
    if tau.spec != f.spec or g.spec != f.spec:
        raise SpecMismatch("f, tau, g must share one subshift")
    out = f
    if s != 0:
        out = out - s * tau
    if z != 0:
        out = out + z * g
    d = max(f.depth, tau.depth, g.depth)
    return out.at_depth(d) if out.depth < d else out


def depth_truncate(
    source,
    m: int,
    *,
    spec: SubshiftSpec | None = None,
    source_depth: int | None = None,
    kind: str | None = None,
) -> LocallyConstantPotential:
    """Project a potential (or callable on words) to depth m.

    The value on an m-word is the source's value on the canonical
    extension of that word (smallest admissible symbol appended until the
    source depth is reached).  For a source of depth <= m this is exact;
    for a theta-Holder source of seminorm H the sup error is at most
    H * theta^(m-1).
    """
    if isinstance(source, LocallyConstantPotential):
        spec = source.spec
        source_depth = source.depth
        if kind is None:
            kind = source.kind
        if source_depth <= m:
            return source.at_depth(m)
        fn: Callable = source
    else:
        if spec is None or source_depth is None:
            raise ValueError("callable sources need spec and source_depth")
        fn = source
    words = admissible_word_list(spec, m)
    vals = np.array(
        [fn(canonical_extension(spec, w, max(m, source_depth))[:source_depth]) for w in words]
    )
    return LocallyConstantPotential(
        spec=spec, depth=m, values=vals, kind=kind or "generic"
    )


def birkhoff_values(phi: LocallyConstantPotential, length: int, n: int) -> np.ndarray:
    """n-step Birkhoff sums of phi over all admissible `length`-words.

    Returns one value per word in lexicographic order; requires
    length >= n + depth(phi) - 1 so every shift is resolved.
    """
    d = phi.depth
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    n_words = len(admissible_word_list(phi.spec, length))
    if n == 0:
        return np.zeros(n_words, dtype=phi.values.dtype)
    if length < n + d - 1:
        raise WordTooShort(
            f"length {length} too short for n={n} Birkhoff terms at depth {d}"
        )
    out = phi.values[block_subword_index(phi.spec, length, 0, d)].copy()
    for i in range(1, n):
        out += phi.values[block_subword_index(phi.spec, length, i, d)]
    return out


def _group_diameter(vals: np.ndarray) -> float:
    """Largest pairwise |difference| within one value group."""
    if len(vals) < 2:
        return 0.0
    if vals.dtype.kind != "c":
        return float(vals.max() - vals.min())
    # Complex values: the diameter needs a pairwise scan.
    diff = np.abs(vals[:, None] - vals[None, :])
    return float(diff.max())


def seminorm_values(
    spec: SubshiftSpec, depth: int, values: np.ndarray, metric: ThetaMetric
) -> float:
    """Exact theta-Holder seminorm of a depth-`depth` table of values.

    sup over word pairs of |v(u) - v(w)| / theta^(common prefix length).
    Pairs with common prefix length j are scanned by grouping words on
    their j-prefix; the group diameter at level j is attained by some
    pair with prefix >= j, and that pair contributes its exact ratio at
    its own level, so the max over levels is exact.
    """
    values = np.asarray(values)
    n_words = len(admissible_word_list(spec, depth))
    if values.shape != (n_words,):
        raise ValueError(f"expected {n_words} values, got shape {values.shape}")
    best = 0.0
    for j in range(depth):
        if j == 0:
            group_ids = np.zeros(n_words, dtype=np.int64)
        else:
            group_ids = block_prefix_index(spec, depth, j)
        level = 0.0
        for gid in np.unique(group_ids):
            d = _group_diameter(values[group_ids == gid])
            if d > level:
                level = d
        best = max(best, level / metric.theta**j)
    return best


def holder_seminorm(phi: LocallyConstantPotential, metric: ThetaMetric) -> float:
    """Exact d_theta-Holder seminorm of a locally constant potential."""
    return seminorm_values(phi.spec, phi.depth, phi.values, metric)


def sup_norm_values(values: np.ndarray) -> float:
    return float(np.abs(np.asarray(values)).max())


@dataclass(frozen=True)
class NormBundle:
    """Sup norm, Holder seminorm, and the combined |.|_inf + seminorm/|b|."""

    sup: float
    seminorm: float
    b: float
    theta: float
    value: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "value", self.sup + self.seminorm / abs(self.b))


def norm_beta_b(
    spec: SubshiftSpec,
    depth: int,
    values: np.ndarray,
    metric: ThetaMetric,
    b: float,
) -> NormBundle:
    """The frequency-weighted norm |h|_inf + |h|_theta / |b|, |b| >= 1.

    This is the norm in which the twisted operators contract; requiring
    |b| >= 1 keeps the seminorm term bounded by the unweighted one.
    """
    if abs(b) < 1.0:
        raise BadFrequency(f"|b| must be >= 1 for the weighted norm, got b={b}")
    sup = sup_norm_values(values)
    semi = seminorm_values(spec, depth, values, metric)
    return NormBundle(sup=sup, seminorm=semi, b=float(b), theta=metric.theta)
