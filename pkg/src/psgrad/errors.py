"""Exception types shared across the package."""


class DomainViolationError(ValueError):
    """Gradient or objective evaluated outside its domain.

    Carries the first offending row index when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidStrategyError(ValueError):
    """Scaling strategy with nonpositive diagonal data."""


class InfeasibleSetError(ValueError):
    """Feasible set found empty (or with empty interior) at construction."""


class UnsupportedConfigurationError(ValueError):
    """Operation requested on a configuration it does not support."""


class StepsizeBoundError(ValueError):
    """Stepsize policy violates the 0 < tau_inf <= tau_sup < 2/L requirement."""


class OracleError(RuntimeError):
    """Reference solver failed to reach its accuracy contract."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""


class TraceSchemaError(ValueError):
    """Stored iteration trace does not match the expected schema."""
