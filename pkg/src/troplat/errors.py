"""Exception types shared across the package."""


class TroplatError(Exception):
    """Base class for all package-specific errors."""


class ParseError(TroplatError):
    """Malformed textual input (series grammar, lattice files, CSV)."""

    def __init__(self, message, position=None, line=None):
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where += f" at line {line}"
        if position is not None:
            where += f" at position {position}"
        super().__init__(message + where)


class IndeterminateValuation(TroplatError):
    """All stored coefficients are zero but the truncation tail is unknown.

    Callers should escalate the working precision and recompute.
    """


class PrecisionExhausted(TroplatError):
    """Precision doubling hit the hard cap without resolving a valuation."""


class SingularMatrix(TroplatError):
    """Matrix is singular over the Laurent-series field."""


class DimensionMismatch(TroplatError):
    """Operands have incompatible dimensions."""


class NotInTightSubspace(TroplatError):
    """Residue vector does not satisfy the tight-generator condition."""


class VerificationFailed(TroplatError):
    """A randomized search did not reach its independently certified bound."""


class IterationBudgetExceeded(TroplatError):
    """Main loop ran past its certified iteration budget; indicates a defect."""


class SizeLimit(TroplatError):
    """Requested brute-force enumeration exceeds the configured size guard."""


class AlgorithmDefect(TroplatError):
    """An internally asserted theorem-level invariant failed.

    Carries a diagnostic payload so the offending instance can be replayed.
    """

    def __init__(self, message, details=None):
        self.details = details or {}
        super().__init__(message)
