"""Exception taxonomy. The CLI maps these onto its documented exit codes."""


class ChernsolveError(Exception):
    """Base class for all library errors."""


class ConfigurationError(ChernsolveError):
    """Invalid input: bad grid parameters, inconsistent bounds, malformed config."""


class DomainError(ConfigurationError):
    """Point or target grid outside the domain where a quantity is defined."""


class ConvergenceError(ChernsolveError):
    """An iteration failed to meet its tolerance within its cap.

    Carries the best residual seen and, for the monotone solver, the
    iteration trace collected so far.
    """

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class MonotonicityError(ConvergenceError):
    """A monotone iterate escaped its barrier interval beyond tolerance."""


class BarrierConstructionError(ChernsolveError):
    """A constructed barrier failed its own verification.

    The offending report is attached so callers can inspect margins.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
