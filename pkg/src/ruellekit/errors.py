"""Exception types shared across the toolkit.

Every failure mode that callers are expected to branch on gets its own
class; generic misuse (wrong types, bad shapes) raises the usual
ValueError/TypeError instead.
"""

from __future__ import annotations

__all__ = [
    "RuellekitError",
    "EmptyRowOrColumn",
    "NotIrreducibleAperiodic",
    "WordTooShort",
    "SpecMismatch",
    "BadFrequency",
    "NoConvergence",
    "NormalizationFailed",
    "BracketFailure",
    "OutOfRange",
    "LatticeDegenerate",
    "TooLarge",
    "QuadratureUnderresolved",
    "ParseError",
    "ValidationError",
]


class RuellekitError(Exception):
    """Base class for all toolkit-specific errors."""


class EmptyRowOrColumn(RuellekitError):
    """A transition matrix has an all-zero row or column."""


class NotIrreducibleAperiodic(RuellekitError):
    """No power of the transition matrix up to the tested bound is positive."""

    def __init__(self, max_power: int):
        self.max_power = max_power
        super().__init__(
            f"transition matrix has no entrywise-positive power up to p={max_power}; "
            "the subshift is not topologically mixing"
        )


class WordTooShort(RuellekitError):
    """A word is too short for the requested Birkhoff sum or block lookup."""


class SpecMismatch(RuellekitError):
    """Two objects built over different subshifts were combined."""


class BadFrequency(RuellekitError):
    """A frequency parameter b with |b| < 1 was passed to a 1/|b|-weighted norm."""


class NoConvergence(RuellekitError):
    """Power iteration failed to reach the requested residual."""

    def __init__(self, residual: float, max_iters: int):
        self.residual = residual
        self.max_iters = max_iters
        super().__init__(
            f"power iteration residual {residual:.3e} after {max_iters} iterations"
        )


class NormalizationFailed(RuellekitError):
    """The normalized potential does not satisfy L 1 = 1 to tolerance."""


class BracketFailure(RuellekitError):
    """A root bracket could not be established."""


class OutOfRange(RuellekitError):
    """A target mean lies outside the achievable range of the pressure curve."""

    def __init__(self, a: float, achievable: tuple[float, float]):
        self.a = a
        self.achievable = achievable
        super().__init__(
            f"a={a:.12g} outside achievable range ({achievable[0]:.12g}, {achievable[1]:.12g})"
        )


class LatticeDegenerate(RuellekitError):
    """The flow variance vanishes: the observable is cohomologous to a multiple of the roof."""


class TooLarge(RuellekitError):
    """An exact enumeration would exceed the configured guard."""

    def __init__(self, count: int, guard: float):
        self.count = count
        self.guard = guard
        super().__init__(f"enumeration of {count} words exceeds guard {guard:.3g}")


class QuadratureUnderresolved(RuellekitError):
    """Halving the quadrature step moved the integral by more than the certification tolerance."""


class ParseError(RuellekitError):
    """A config file could not be parsed."""


class ValidationError(RuellekitError):
    """A parsed config violates a documented invariant."""
