"""Exception hierarchy."""


class GaussianError(ValueError):
    """Base class for invalid inputs to the covariance-matrix machinery."""


class NonPhysicalStateError(GaussianError):
    """The matrix violates the uncertainty relation (sigma + i Omega >= 0)."""


class NotSymplecticError(GaussianError):
    """A transform does not preserve the symplectic form."""


class NotEntangledError(GaussianError):
    """An operation defined only for entangled states received a separable one."""


class CoefficientSignError(GaussianError):
    """A squeezing coefficient that should be positive is not.

    Carries the offending coefficients so callers can inspect the state.
    """

    def __init__(self, message, coefficients=None):
        super().__init__(message)
        self.coefficients = coefficients


class EigenSolverError(GaussianError):
    """The numerical eigen-solver failed or returned unusable values."""
