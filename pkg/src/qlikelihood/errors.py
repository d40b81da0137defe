"""
qlikelihood.errors

Exception hierarchy shared by every module, plus the flagged-infinity value
returned where a divergence or log-likelihood is legitimately infinite.
"""

from __future__ import annotations


class QlikelihoodError(Exception):
    """Base class for all errors raised by qlikelihood."""


class DimensionError(QlikelihoodError):
    """A matrix or distribution has the wrong shape for the operation."""


class DomainError(QlikelihoodError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ConfigurationError(QlikelihoodError):
    """Inconsistent run configuration (flags, config file, basis/strategy)."""


class SimulationError(QlikelihoodError):
    """The simulator detected a broken invariant (e.g. norm drift)."""


class SynthesisError(QlikelihoodError):
    """Two-qubit gate synthesis failed."""


class RequiresThreeCnotsError(SynthesisError):
    """The unitary lies outside the two-CNOT class."""

    def __init__(self, g1: complex, g2: float, trace_gamma: complex):
        self.g1 = g1
        self.g2 = g2
        self.trace_gamma = trace_gamma
        super().__init__(
            f"unitary requires 3 CNOTs (g1={g1:.6g}, g2={g2:.6g}, "
            f"tr gamma={trace_gamma:.6g})"
        )


class QasmParseError(QlikelihoodError):
    """Unsupported or malformed OpenQASM input. ``line``/``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class FlaggedInfinity(float):
    """
    An infinite float that remembers why it is infinite.

    Behaves as ``float('inf')`` / ``float('-inf')`` in arithmetic and
    comparisons, but callers can tell a genuine infinite divergence apart
    from an overflow with :func:`is_flagged_infinity`.
    """

    reason: str

    def __new__(cls, reason: str, negative: bool = False) -> "FlaggedInfinity":
        obj = super().__new__(cls, "-inf" if negative else "inf")
        obj.reason = reason
        return obj

    def __repr__(self) -> str:
        sign = "-" if self < 0 else ""
        return f"FlaggedInfinity({sign}inf, {self.reason!r})"


def infinite_divergence(reason: str = "disjoint support") -> FlaggedInfinity:
    return FlaggedInfinity(reason)


def impossible_outcome(reason: str = "observed outcome has zero probability") -> FlaggedInfinity:
    return FlaggedInfinity(reason, negative=True)


def is_flagged_infinity(value: object) -> bool:
    return isinstance(value, FlaggedInfinity)
