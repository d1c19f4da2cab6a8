"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter or configuration value violates a documented contract."""


class NumericalAbortError(RuntimeError):
    """Propagation produced non-finite values or a vanishing norm.

    Signals a catastrophically wrong discretization rather than a
    recoverable condition; callers should stop and report.
    """
