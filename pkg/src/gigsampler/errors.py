"""Exception types shared across the package."""


class GigSamplerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GigSamplerError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedParametersError(GigSamplerError, ValueError):
    """Requested a GIG sub-family the generator deliberately excludes."""


class ConvergenceError(GigSamplerError, RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""


class CutoffCapExceededError(GigSamplerError, RuntimeError):
    """Cutoff search exceeded the configured safety cap."""


class CutoffCountUnattainableError(GigSamplerError, RuntimeError):
    """No rejection rate yields the requested number of cutoff points.

    The count function of the rejection rate is an integer-valued step
    function; it can skip values.  ``nearest_below``/``nearest_above`` report
    the closest counts actually achievable at the search resolution.
    """

    def __init__(self, requested, nearest_below, nearest_above):
        self.requested = requested
        self.nearest_below = nearest_below
        self.nearest_above = nearest_above
        super().__init__(
            f"no rejection rate yields exactly {requested} cutoff points; "
            f"nearest achievable counts are {nearest_below} and {nearest_above}"
        )
