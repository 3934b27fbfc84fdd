"""Exception types shared across the package."""

from __future__ import annotations


class BmdpError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"


class ParseError(BmdpError):
    """Malformed model or automaton text."""

    kind = "parse"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModelValidationError(BmdpError):
    """A structurally well-formed model violates a semantic invariant."""

    kind = "validation"

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        if len(self.violations) > 5:
            summary += f"; ... ({len(self.violations)} total)"
        super().__init__(f"invalid model: {summary}")


class SkeletonMismatchError(BmdpError):
    """Two models that should share states/actions do not."""

    kind = "validation"


class BoundViolationError(BmdpError):
    """A chosen distribution leaves its interval row."""

    kind = "validation"


class InfeasibleRowError(BmdpError):
    """An interval row admits no probability distribution."""

    kind = "validation"


class AlphabetError(BmdpError):
    """A letter outside the automaton alphabet was used."""

    kind = "validation"


class ConvergenceError(BmdpError):
    """Value iteration ran out of iterations; carries the last iterate."""

    kind = "convergence"

    def __init__(self, message: str, values=None, residual: float | None = None):
        self.values = values
        self.residual = residual
        super().__init__(message)


class SizeGuardError(BmdpError):
    """A brute-force enumeration would exceed its combination budget."""

    kind = "usage"


class SolverInternalError(BmdpError):
    """An internal solver invariant failed; indicates a bug, not bad input."""

    kind = "internal"
