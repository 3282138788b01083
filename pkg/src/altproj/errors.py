"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside an operation's domain."""


class NumericalFailure(RuntimeError):
    """An iteration produced a non-finite value. Carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NoRateError(ValueError):
    """A rate was requested from a trace that did not converge."""


class HypothesisViolation(ValueError):
    """A convergence theorem's hypotheses do not hold for the given inputs."""


class ScenarioError(ValueError):
    """Malformed or invalid scenario file."""

    def __init__(self, message, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
