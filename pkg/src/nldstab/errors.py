"""Exception types raised by the package."""


class ParameterError(ValueError):
    """Invalid model, frequency or numerics parameter."""


class IntegrationDiverged(RuntimeError):
    """The stationary flow could not be held on the homoclinic orbit."""


class NoSignChange(ValueError):
    """A root bracket does not straddle a sign change."""


class GridMismatch(ValueError):
    """Profile and operator (or two profiles) live on different grids."""


class ParityDefect(ValueError):
    """Profile is not parity symmetric to the required tolerance."""


class EigensolverFailure(RuntimeError):
    def __init__(self, omega, message=""):
        self.omega = omega
        super().__init__(f"eigensolver failed at omega={omega!r}: {message}")
