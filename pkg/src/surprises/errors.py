"""Exception hierarchy.

``ScenarioError`` and its subclasses are user-facing problems (bad input,
bad parameters, out-of-scale requests); the CLI maps them to exit code 1.
``InvariantViolation`` signals an internal inconsistency (exit code 2).
"""


class ScenarioError(Exception):
    pass


class DomainError(ScenarioError, ValueError):
    """Unknown variable, out-of-grid time point, malformed object."""


class ScenarioSyntaxError(ScenarioError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ParameterError(ScenarioError, ValueError):
    pass


class PersistenceRegimeError(ParameterError):
    """A fluent is not highly persistent, so the first-order approximation is refused."""


class UnexplainableScenarioError(ScenarioError):
    """Some observation is unsatisfiable on its own; no surprise set can help."""


class ScaleError(ScenarioError):
    pass


class DegenerateScenarioError(ScenarioError):
    pass


class ConditioningError(ScenarioError):
    pass


class InvariantViolation(RuntimeError):
    pass
