"""Exception hierarchy for qcorr."""


class QCorrError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(QCorrError, ValueError):
    """Input failed a structural or physical validity check."""


class NonSquare(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class HermitianDefectTooLarge(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class NegativeEigenvalue(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


class EmptyKeepSet(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class UnknownName(ValidationError):
    pass


class WrongArity(ValidationError):
    pass


class ConventionRequired(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class StateIOError(QCorrError, OSError):
    pass


class NoConvergence(QCorrError, RuntimeError):
    pass


class OptimizerFailure(QCorrError, RuntimeError):
    """The measurement optimizer produced an impossible value (a defect, not bad input)."""


class InvariantViolation(QCorrError, RuntimeError):
    """Two routes to the same quantity disagreed beyond tolerance."""


class ReplayMismatch(QCorrError, RuntimeError):
    pass
