# dmpaSim/exceptions.py - domain errors raised by the simulator
#
# Parameter bound violations use django.core.exceptions.ValidationError;
# everything below is a failure of the physics or the numerics and maps to
# exit code 1 in the management commands.


class SimulationError(Exception):
    """Base class for domain errors (instability, non-convergence, ...)"""


class InstabilityError(SimulationError):
    """Unconditional drift is unstable or an integration diverged"""

    def __init__(self, message, time=None, eigenvalue=None):
        super().__init__(message)
        self.time = time
        self.eigenvalue = eigenvalue


class ConvergenceError(SimulationError):
    """An iterative solver stopped without meeting its tolerance"""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class UnsupportedConfigurationError(SimulationError):
    """The requested formula only exists for another scheme or detuning"""


class NonUnimodalError(SimulationError):
    """More than one interior local minimum on the coarse optimisation grid"""

    def __init__(self, message, grid=None, values=None):
        super().__init__(message)
        self.grid = grid
        self.values = values


class InvalidStateError(SimulationError):
    """Covariance matrix is not positive definite"""
