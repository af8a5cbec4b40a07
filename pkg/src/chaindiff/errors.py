"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A configuration or specification invariant does not hold."""


class IntegrationError(RuntimeError):
    """The integrated state became non-finite.

    Attributes
    ----------
    time : float
        Simulation time of the first non-finite state.
    """

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"state became non-finite at t={time:.17g}")
