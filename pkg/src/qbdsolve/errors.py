"""Exception hierarchy shared by all qbdsolve modules."""


class QbdError(Exception):
    """Base class for every error raised by qbdsolve."""

    code = "error"


class ValidationError(QbdError, ValueError):
    code = "validation"


class DimensionMismatch(ValidationError):
    pass


class NegativeEntry(ValidationError):
    def __init__(self, block, index, value):
        self.block = block
        self.index = tuple(index)
        self.value = value
        super().__init__(
            f"negative entry in {block}[{self.index[0]}][{self.index[1]}] = {value!r}"
        )


class RowSumViolation(ValidationError):
    def __init__(self, row, deviation):
        self.row = row
        self.deviation = deviation
        super().__init__(
            f"row {row} of A+B+I+C sums to 1{deviation:+.3e}, not 1"
        )


class Reducible(ValidationError):
    def __init__(self, subset):
        self.subset = tuple(subset)
        super().__init__(
            f"A+B+I+C is reducible: states {list(self.subset)} form a closed class"
        )


class NonFinite(ValidationError):
    pass


class ParameterOutOfRange(ValidationError):
    pass


class TargetUnreachable(ParameterOutOfRange):
    pass


class ParseError(QbdError):
    code = "parse"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SingularMatrix(QbdError, ArithmeticError):
    code = "singular"


class SingularStepMatrix(SingularMatrix):
    """A shifted step matrix ``M + t N`` could not be factored."""


class SingularSystem(SingularMatrix):
    """Raised by the stationary-vector solve for reducible or invalid input."""


class NoConvergence(QbdError):
    code = "no-convergence"


class MaxIterations(NoConvergence):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class MonotonicityViolation(QbdError):
    code = "monotonicity"


class CertificateFailure(QbdError):
    """The M-matrix hypothesis does not hold at the initial iterate."""

    code = "certificate"


class NotZMatrix(QbdError):
    code = "not-z-matrix"


class OracleCapExceeded(QbdError):
    code = "oracle-cap"
