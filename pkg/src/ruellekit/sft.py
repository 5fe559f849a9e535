"""One-sided subshifts of finite type: alphabets, transition matrices, words.

A subshift is specified by a 0/1 transition matrix A over the alphabet
{0, ..., k-1}; a word (w_0, ..., w_{n-1}) is admissible when
A[w_i, w_{i+1}] = 1 for every step.  All word enumeration in the toolkit
is lexicographic so downstream CSV output is deterministic.

Words are plain tuples of ints.  Specs are hashable, which lets the
module cache word tables and block-successor tables per (spec, length).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import EmptyRowOrColumn, NotIrreducibleAperiodic, WordTooShort

__all__ = [
    "Word",
    "SubshiftSpec",
    "ThetaMetric",
    "validate_subshift",
    "admissible_words",
    "admissible_word_list",
    "word_indexer",
    "count_admissible_words",
    "preimage_symbols",
    "successor_symbols",
    "canonical_extension",
    "birkhoff_sum",
    "d_theta",
]

Word = tuple  # tuple[int, ...]; kept loose so literals read cleanly


@dataclass(frozen=True)
class SubshiftSpec:
    """Alphabet size and transition matrix of a one-sided subshift.

    `transitions` is stored as a tuple of tuples so the spec is hashable
    and can key the enumeration caches.
    """

    k: int
    transitions: tuple

    @classmethod
    def from_matrix(cls, matrix) -> "SubshiftSpec":
        arr = np.asarray(matrix, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("transition matrix entries must be 0 or 1")
        rows = tuple(tuple(int(x) for x in row) for row in arr)
        return cls(k=arr.shape[0], transitions=rows)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=np.int64)

    def is_full_shift(self) -> bool:
        return all(all(x == 1 for x in row) for row in self.transitions)

    def allows(self, i: int, j: int) -> bool:
        return self.transitions[i][j] == 1


def validate_subshift(spec: SubshiftSpec) -> None:
    """Check that the subshift is topologically mixing.

    Raises EmptyRowOrColumn if some symbol has no successor or no
    predecessor, and NotIrreducibleAperiodic if no power A^p with
    p <= k^2 + 1 is entrywise positive (the Wielandt bound guarantees
    a primitive matrix has a positive power by then).
    """
    A = spec.matrix
    k = spec.k
    if k < 1:
        raise ValueError("alphabet must be nonempty")
    if (A.sum(axis=1) == 0).any() or (A.sum(axis=0) == 0).any():
        raise EmptyRowOrColumn("transition matrix has an all-zero row or column")
    max_power = k * k + 1
    # Clip products to {0,1}: only positivity matters, and this avoids overflow.
    P = A.copy()
    for _ in range(max_power):
        if (P > 0).all():
            return
        P = np.minimum(P @ A, 1)
    raise NotIrreducibleAperiodic(max_power)


def _words_recursive(spec: SubshiftSpec, n: int, prefix: tuple) -> Iterator[tuple]:
    if len(prefix) == n:
        yield prefix
        return
    if not prefix:
        for j in range(spec.k):
            yield from _words_recursive(spec, n, (j,))
        return
    last = prefix[-1]
    row = spec.transitions[last]
    for j in range(spec.k):
        if row[j]:
            yield from _words_recursive(spec, n, prefix + (j,))


def admissible_words(
    spec: SubshiftSpec, n: int, first_symbol: int | None = None
) -> Iterator[tuple]:
    """Yield all admissible words of length n in lexicographic order.

    `first_symbol` restricts the stream to one prefix class, which is how
    enumeration work is split across workers.
    """
    if n < 1:
        raise ValueError(f"word length must be >= 1, got {n}")
    if first_symbol is None:
        yield from _words_recursive(spec, n, ())
    else:
        yield from _words_recursive(spec, n, (int(first_symbol),))


@lru_cache(maxsize=None)
def admissible_word_list(spec: SubshiftSpec, n: int) -> tuple:
    """All admissible n-words as a tuple, lexicographic; cached per (spec, n)."""
    return tuple(admissible_words(spec, n))


@lru_cache(maxsize=None)
def word_indexer(spec: SubshiftSpec, n: int) -> dict:
    """Map each admissible n-word to its index in lexicographic order."""
    return {w: i for i, w in enumerate(admissible_word_list(spec, n))}


def count_admissible_words(spec: SubshiftSpec, n: int) -> int:
    """Exact count of admissible n-words, via integer matrix powers.

    Uses Python ints so the count never overflows, which matters when the
    count is compared against an enumeration guard.
    """
    if n < 1:
        raise ValueError(f"word length must be >= 1, got {n}")
    k = spec.k
    # v[j] = number of admissible words of current length ending at j
    v = [1] * k
    for _ in range(n - 1):
        v = [sum(v[i] * spec.transitions[i][j] for i in range(k)) for j in range(k)]
    return sum(v)


def preimage_symbols(spec: SubshiftSpec, symbol: int) -> tuple:
    """Symbols j with A[j, symbol] = 1, ascending."""
    return tuple(j for j in range(spec.k) if spec.transitions[j][symbol])


def successor_symbols(spec: SubshiftSpec, symbol: int) -> tuple:
    """Symbols j with A[symbol, j] = 1, ascending."""
    return tuple(j for j in range(spec.k) if spec.transitions[symbol][j])


def canonical_extension(spec: SubshiftSpec, w: tuple, length: int) -> tuple:
    """Extend w to the given length by repeatedly appending the smallest
    admissible symbol.  Well-defined because every row has a successor."""
    out = tuple(w)
    while len(out) < length:
        succ = successor_symbols(spec, out[-1])
        out = out + (succ[0],)
    return out


def check_word(spec: SubshiftSpec, w: Sequence) -> tuple:
    """Validate symbols and transitions of w; return it as a tuple."""
    w = tuple(int(x) for x in w)
    for x in w:
        if not 0 <= x < spec.k:
            raise ValueError(f"symbol {x} outside alphabet of size {spec.k}")
    for i in range(len(w) - 1):
        if not spec.transitions[w[i]][w[i + 1]]:
            raise ValueError(f"inadmissible transition {w[i]} -> {w[i + 1]} at position {i}")
    return w


def birkhoff_sum(phi: Callable, w: Sequence, n: int, depth: int | None = None):
    """n-step Birkhoff sum phi(w) + phi(sigma w) + ... + phi(sigma^{n-1} w).

    phi must be constant on cylinders of length `depth` (taken from
    phi.depth when not given), so w needs at least n + depth - 1 symbols.
    n = 0 returns 0.
    """
    if depth is None:
        depth = phi.depth
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 0.0
    w = tuple(w)
    need = n + depth - 1
    if len(w) < need:
        raise WordTooShort(
            f"word of length {len(w)} too short for n={n} terms at depth {depth} (need {need})"
        )
    total = phi(w[0:depth])
    for i in range(1, n):
        total = total + phi(w[i : i + depth])
    return total


@dataclass(frozen=True)
class ThetaMetric:
    """The metric d_theta(u, v) = theta^(length of common prefix), 0 on equal words."""

    theta: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must be in (0, 1), got {self.theta}")


def d_theta(metric: ThetaMetric, u: Sequence, v: Sequence) -> float:
    """Distance theta^j where j is the length of the common prefix of u, v."""
    u = tuple(u)
    v = tuple(v)
    if len(u) != len(v):
        raise ValueError("d_theta compares words of equal length")
    if u == v:
        return 0.0
    j = 0
    while u[j] == v[j]:
        j += 1
    return metric.theta**j


# ---------------------------------------------------------------------------
# Block tables used by the streaming cylinder enumerator.

@lru_cache(maxsize=None)
def block_words_array(spec: SubshiftSpec, n: int) -> np.ndarray:
    """Admissible n-words as an (N, n) int16 array in lexicographic order."""
    arr = np.array(admissible_word_list(spec, n), dtype=np.int16).reshape(-1, n)
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=None)
def block_successor_table(spec: SubshiftSpec, n: int) -> np.ndarray:
    """succ[s, j] = index of word w[1:] + (j,) for n-word index s, or -1.

    Appending j to a word with trailing block s is admissible iff
    A[last symbol of s, j] = 1; the shifted block is then automatically
    admissible.
    """
    words = admissible_word_list(spec, n)
    index = word_indexer(spec, n)
    succ = np.full((len(words), spec.k), -1, dtype=np.int64)
    for s, w in enumerate(words):
        last = w[-1]
        for j in range(spec.k):
            if spec.transitions[last][j]:
                succ[s, j] = index[w[1:] + (j,)]
    succ.flags.writeable = False
    return succ


@lru_cache(maxsize=None)
def block_subword_index(spec: SubshiftSpec, n: int, start: int, d: int) -> np.ndarray:
    """Index of the d-block starting at `start` inside each n-word."""
    if start < 0 or start + d > n:
        raise ValueError(f"subword [{start}:{start + d}] does not fit in length {n}")
    words = admissible_word_list(spec, n)
    index_d = word_indexer(spec, d)
    out = np.array([index_d[w[start : start + d]] for w in words], dtype=np.int64)
    out.flags.writeable = False
    return out


def block_suffix_index(spec: SubshiftSpec, n: int, d: int) -> np.ndarray:
    """Index of the trailing d-block of each n-word (d <= n)."""
    return block_subword_index(spec, n, n - d, d)


def block_prefix_index(spec: SubshiftSpec, n: int, d: int) -> np.ndarray:
    """Index of the leading d-block of each n-word (d <= n)."""
    return block_subword_index(spec, n, 0, d)
