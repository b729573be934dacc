"""Exception and warning types raised across the package."""


class HadamardOptError(Exception):
    """Base class for all package errors."""


class IndeterminateSum(HadamardOptError, ArithmeticError):
    """(+inf) + (-inf) was requested."""


class NonPositiveScale(HadamardOptError, ValueError):
    pass


class UnknownFunction(HadamardOptError, KeyError):
    def __str__(self):
        return f"unknown function id: {self.args[0]!r}"


class EvaluationError(HadamardOptError, RuntimeError):
    """An evaluator raised, returned NaN, or returned -inf."""


class PointOutsideDomain(HadamardOptError, ValueError):
    """The base point has f(x) = +inf."""


class EmptySubdifferential(HadamardOptError, ValueError):
    pass


class MissingAnalytic(HadamardOptError, ValueError):
    pass


class BadOrder(HadamardOptError, ValueError):
    pass


class ExpressionError(HadamardOptError, ValueError):
    """Syntax or semantic error in a corpus expression."""


class ConfigError(HadamardOptError, ValueError):
    pass


class GridTooCoarse(UserWarning):
    """Adjacent stationary-scan verdicts flip too often for the grid to be trusted."""


class NotStabilized(UserWarning):
    """A liminf estimate did not reach a plateau over the last shells."""
