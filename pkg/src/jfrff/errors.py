"""Exception types raised by the jfrff library.

Argument/shape mistakes raise plain ``ValueError``; the classes below mark
failure modes a caller may want to catch and handle specifically (retry with
a different shift operator, regularize, rebuild a checkpoint, ...).
"""


class JfrffError(Exception):
    """Base class for all library-specific errors."""


class DegenerateInputError(JfrffError):
    """Input data cannot support the requested operation (zero-degree vertex,
    constant series row, all-zero signal, zero reference energy)."""


class IllConditionedBasisError(JfrffError):
    """Eigenvector matrix condition number exceeds the configured bound."""

    def __init__(self, message, condition_estimate):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class SingularMatrixError(JfrffError):
    """Matrix logarithm requested for a matrix with a zero eigenvalue."""


class BranchCutError(JfrffError):
    """An eigenvalue lies on (or too close to) the negative real axis, so the
    principal matrix logarithm is ambiguous."""


class CapacityError(JfrffError):
    """A dense operator was requested above the configured size guard."""


class RankDeficiencyError(JfrffError):
    """Filter normal equations are singular or numerically rank-deficient."""


class StaleTapeError(JfrffError):
    """Backward pass invoked with a tape recorded under different parameters."""


class CsvParseError(JfrffError):
    """Malformed CSV input; carries the offending location."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class FingerprintMismatchError(JfrffError):
    """Checkpoint eigen-basis fingerprint does not match the supplied graph."""
