"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """A model or call parameter is outside its valid domain."""


class DivergenceError(ValueError):
    """An improper integral diverges for the requested exponents."""


class ResourceLimitError(RuntimeError):
    """The requested computation exceeds the configured desk-scale budget."""


class UnsupportedSamplingError(RuntimeError):
    """Sampling was requested from a distribution that cannot be sampled
    (formal-mode tails are integration devices, not probability laws)."""


class ConvergenceWarning(RuntimeWarning):
    """A quadrature did not reach its tolerance; the carried value is the
    best estimate and the warning message holds the achieved error bound."""
