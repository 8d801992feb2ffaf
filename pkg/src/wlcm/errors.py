"""Exception hierarchy.

``DataError`` subclasses signal bad inputs (CLI exit code 2);
``NumericalError`` subclasses signal numerical failures (exit code 3).
"""


class WLCMError(Exception):
    pass


class DataError(WLCMError, ValueError):
    pass


class NumericalError(WLCMError, ArithmeticError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyClass(DataError):
    def __init__(self, k: int):
        # k is reported 1-based
        super().__init__(f"class {k} has no members")
        self.k = k


class AllZero(DataError):
    pass


class ZeroTheta(DataError):
    pass


class RhoOutOfRange(DataError):
    pass


class RankDeficient(DataError):
    pass


class DomainViolation(DataError):
    def __init__(self, i: int, j: int, kind: str, value: float):
        super().__init__(f"R0[{i}, {j}] = {value!r} outside the legal domain of {kind}")
        self.i, self.j, self.kind, self.value = i, j, kind, value


class RetriesExhausted(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class NonFiniteInput(DataError):
    pass


class DegenerateInput(DataError):
    pass


class SingularClassMatrix(NumericalError):
    pass


class SchemaError(DataError):
    pass


class EmptyAfterFilter(DataError):
    pass


class ConfigError(DataError):
    pass
