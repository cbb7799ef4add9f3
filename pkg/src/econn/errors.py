"""Exception hierarchy for the engine.

Every class carries an ``exit_code`` used by the command-line front end:
2 for input/spec problems, 3 for violated structural preconditions and
4 for numerical failures.
"""


class EngineError(Exception):
    exit_code = 4


class SpecParseError(EngineError):
    exit_code = 2

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NonPositiveLambda(SpecParseError):
    pass


class SingularMetric(EngineError):
    pass


class SingularOperator(EngineError):
    pass


class DerivativeFailure(EngineError):
    pass


class EvaluationFailure(EngineError):
    pass


class InvalidFactor(EngineError):
    exit_code = 3


class InvalidStructure(EngineError):
    exit_code = 3


class GeodesicViolation(EngineError):
    exit_code = 3


class SpecialConditionViolated(EngineError):
    exit_code = 3


class IllConditionedSystem(EngineError):
    pass
