"""Exception hierarchy shared by all modules."""


class ConfigurationError(ValueError):
    """An invalid chain or protocol configuration."""


class ResourceError(RuntimeError):
    """A brute-force computation was asked for more state space than it supports."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed or produced inconsistent output."""


class EigensolverError(NumericalError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalInstabilityError(NumericalError):
    """Accumulated probabilities exceeded one beyond round-off."""


class UnconvergedSeriesError(NumericalError):
    """The truncated success series did not capture enough probability mass."""

    def __init__(self, mass, k_max, threshold):
        super().__init__(
            f"captured probability mass {mass:.6g} < {threshold} after k_max={k_max} measurements"
        )
        self.mass = mass
        self.k_max = k_max
        self.threshold = threshold


class NonTransferringChannelWarning(RuntimeWarning):
    """The channel never moves an excitation (transfer probability zero)."""
