"""Exception hierarchy."""


class QuasiProbError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QuasiProbError, ValueError):
    pass


class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class NotSquare(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class InvalidSpin(ValidationError):
    pass


class NormalizationMismatch(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class AxisOutOfRange(ValidationError, IndexError):
    pass


class DegreeTooLarge(ValidationError):
    pass


class OverflowGuard(ValidationError):
    pass


class BadGridSpec(ValidationError):
    pass


class EmptyMeasure(ValidationError):
    pass


class EigSolverFailure(QuasiProbError, RuntimeError):
    pass


class ImaginaryResidue(QuasiProbError, ArithmeticError):
    """A quantity that must be real came out with a sizeable imaginary part."""


class AtomBudgetExceeded(QuasiProbError, MemoryError):
    pass


class QuadratureUnderresolved(QuasiProbError):
    pass


class ParseError(QuasiProbError, ValueError):
    """Malformed input file; ``field`` is a JSON path, ``line`` a 1-based line number."""

    def __init__(self, message, *, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
