"""Exception types shared by the numerical modules and the CLI."""


class PreconditionError(ValueError):
    """An input violates a documented precondition (exit status 4 in the CLI)."""


class SingularityError(PreconditionError):
    """A kernel was evaluated at a coincident or otherwise singular point."""


class ConvergenceError(RuntimeError):
    """A quadrature or solver failed to reach its tolerance (exit status 3).

    The last available estimate is kept so callers can still inspect it.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class PoleProximityError(ConvergenceError):
    """The spectral kernel was evaluated too close to its surface-wave pole."""
