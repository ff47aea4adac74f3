"""Exception and warning types raised by wavebal."""


class WavebalError(Exception):
    """Base class for all wavebal errors."""


class QuadratureError(WavebalError):
    """Adaptive quadrature of the damping coefficient did not converge."""


class RootFindingError(WavebalError):
    """The intermediate-state equation of a Riemann problem could not be solved."""


class SmallnessViolation(WavebalError):
    """A node jump is too large for the interaction estimates (sup g' * delta >= 1)."""


class InvariantViolation(WavebalError):
    """A simulated state left the invariant domain or produced a non-finite value."""


class ExactOverflowError(WavebalError, OverflowError):
    """Exact integer arithmetic would exceed the 64-bit range."""


class DecayTheoryWarning(UserWarning):
    """The decay constants are undefined (d1 <= 0) or the nonlinearity condition fails."""
