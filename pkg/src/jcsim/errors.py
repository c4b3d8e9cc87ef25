"""Exception and warning types shared across the package."""


class JcsimError(Exception):
    """Base class for all computational failures raised by this package."""


class DegenerateKernel(JcsimError):
    """Steady-state solve found a (near-)degenerate Liouvillian kernel.

    Raised when the two smallest singular values agree to better than a
    relative 1e-10, i.e. the stationary state is not unique at working
    precision. The condition is reported, never silently resolved.
    """


class StepFailure(JcsimError):
    """An adaptive integrator could not meet its tolerance.

    Carries the time actually reached in ``t_reached``.
    """

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class ZeroIntensity(JcsimError):
    """Intensity correlation requested for a state with no photons."""


class NormCollapse(JcsimError):
    """Trajectory state norm fell below 1e-3 before renormalization."""


class ConfigError(JcsimError):
    """Experiment configuration is invalid; ``field`` names the offender."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class TruncationWarning(UserWarning):
    """Fock-space tail holds more than 1e-6 probability in a reported state."""
