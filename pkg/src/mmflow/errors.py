"""Exception hierarchy shared by all mmflow modules."""


class MMFlowError(Exception):
    """Base class for every error raised by the package."""


class InputError(MMFlowError, ValueError):
    """Bad input: maps to CLI exit code 2."""


class AnalysisError(MMFlowError, RuntimeError):
    """A computation could not complete: maps to CLI exit code 1."""


# algebra
class EmptyWeights(InputError):
    pass


class NotSkewHermitian(InputError):
    pass


class NotClosedUnderBracket(InputError):
    def __init__(self, pair, residual):
        self.pair = pair
        self.residual = residual
        super().__init__(
            f"basis not closed under bracket: [xi_{pair[0]}, xi_{pair[1]}] "
            f"leaves the span (residual {residual:.3e})"
        )


class DimensionMismatch(InputError):
    pass


class Overflow(AnalysisError):
    pass


class NotSubalgebra(InputError):
    pass


# symplectic
class ZeroProjectivePoint(InputError):
    pass


# flow
class StepUnderflow(AnalysisError):
    pass


class NotCommuting(InputError):
    pass


# git
class NotTorusKind(InputError):
    pass


class EmptySupport(InputError):
    pass


class ZeroPoint(InputError):
    pass


# kstab
class InsufficientSamples(InputError):
    pass


class NotPolynomial(AnalysisError):
    pass


class NonpositiveLeadingCoefficient(InputError):
    pass


class EnumerationBoundExceeded(InputError):
    pass


class IllConditioned(AnalysisError):
    pass


# scenario
class ParseError(InputError):
    def __init__(self, message, position=None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class SchemaError(InputError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class IoError(AnalysisError):
    pass
