"""Exception types shared across the package."""


class TailsepError(Exception):
    """Base class for all package errors."""


class InvalidParameters(TailsepError, ValueError):
    """Distribution or test parameters outside their admissible range."""


class SupportError(TailsepError, ValueError):
    """An argument falls outside the support of a distribution."""


class TiedThresholdError(TailsepError, ValueError):
    """Order statistics that must differ are equal (zero spacing)."""


class ConvergenceError(TailsepError, RuntimeError):
    """A numerical solver failed to converge.

    ``bracket`` and ``iterations`` describe the last state of the solver
    so callers can report them.
    """

    def __init__(self, message, bracket=None, iterations=None):
        super().__init__(message)
        self.bracket = bracket
        self.iterations = iterations
