"""Exception hierarchy.

Every error raised by the package derives from one of three families, which the
CLI maps onto exit codes: configuration (1), geometry (2), numerical solver (3).
"""


class InsulateError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(InsulateError, ValueError):
    exit_code = 1


class GeometryError(InsulateError):
    exit_code = 2


class SolverError(InsulateError):
    exit_code = 3


# configuration / argument errors
class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class InvalidParameters(ConfigError):
    pass


class InvalidRadii(ConfigError):
    pass


class ConditionViolated(ConfigError):
    pass


class EmptyGrid(ConfigError):
    pass


class UnknownTag(ConfigError):
    pass


class ZeroVector(ConfigError):
    pass


class MeshMismatch(ConfigError):
    pass


# geometry
class NonPositiveRadius(GeometryError, ValueError):
    pass


class MeshFailure(GeometryError):
    pass


class DegenerateTriangle(MeshFailure):
    pass


class SelfIntersection(MeshFailure):
    pass


class NonSimplePolygon(GeometryError, ValueError):
    pass


class EpsTooLarge(GeometryError, ValueError):
    pass


# numerics
class SolverFailure(SolverError):
    pass


class NotPositiveDefinite(SolverFailure):
    pass


class MaxIterationsExceeded(SolverFailure):
    """CG ran out of iterations; ``x`` holds the best iterate found."""

    def __init__(self, message, x=None, residual=None, iterations=None):
        super().__init__(message)
        self.x = x
        self.residual = residual
        self.iterations = iterations


class IterationStall(SolverFailure):
    pass


class BracketFailure(SolverError):
    pass


class BudgetExhausted(SolverError):
    pass
