"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad user input: geometry, configuration, or data that violates a precondition."""


class SolverError(RuntimeError):
    """Numerical failure (e.g. iterative solver did not reach the requested residual)."""

    def __init__(self, message: str, achieved_residual: float | None = None):
        super().__init__(message)
        self.achieved_residual = achieved_residual
