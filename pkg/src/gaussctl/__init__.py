"""Two-mode Gaussian states under thermal loss, with locally optimal controls."""
from gaussctl._backend import BACKEND
from gaussctl.control import (
    ControlStrategy,
    SqueezeCoefficients,
    death_time,
    optimal_control_both,
    optimal_control_single,
    optimal_squeezings,
    sigma_control,
    sigma_squeeze_coefficients,
    simulate,
    squeeze_coefficients,
)
from gaussctl.core import (
    CovarianceMatrix,
    InvariantSet,
    NormalForm,
    SymplecticTransform,
    apply_symplectic,
    invariants,
    is_physical,
    log_negativity,
    make_from_normal_form,
    make_thermal,
    make_two_mode_squeezed,
    normal_form,
    partial_transpose,
    pt_min_eigenvalue,
    same_normal_form,
    symplectic_eigenvalues,
)
from gaussctl.dynamics import BathParams, Trajectory, bath_from_temperature, propagate
from gaussctl.errors import (
    CoefficientSignError,
    EigenSolverError,
    GaussianError,
    NonPhysicalStateError,
    NotEntangledError,
    NotSymplecticError,
)

__version__ = "0.1.0"
