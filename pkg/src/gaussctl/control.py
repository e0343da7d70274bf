"""Locally optimal instantaneous controls and the controlled simulator.

Two control laws are available:

``negativity``
    minimises the instantaneous decay rate of the smallest partially
    transposed symplectic eigenvalue (hence of the log-negativity);
``sigma_tilde``
    minimises the instantaneous rate of the PT separability invariant
    ``Det sigma - Delta_tilde + 1``.

Both act through local squeezing in the normal-form frame.  Controls are
impulsive: they are applied as exact congruences between intervals of free
evolution.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from gaussctl import _settings
from gaussctl._backend import kernels
from gaussctl.core import (
    CovarianceMatrix,
    NormalForm,
    SymplecticTransform,
    _as_cm,
    normal_form,
)
from gaussctl.dynamics import BathParams, Trajectory
from gaussctl.errors import CoefficientSignError, GaussianError, NotEntangledError

LAWS = ("none", "negativity", "sigma_tilde")
SCOPES = ("both", "mode1", "mode2")

_KERNEL_LAW = {"negativity": kernels.LAW_NEGATIVITY, "sigma_tilde": kernels.LAW_SIGMA}
_KERNEL_SCOPE = {"both": kernels.SCOPE_BOTH, "mode1": kernels.SCOPE_MODE1, "mode2": kernels.SCOPE_MODE2}


@dataclass(frozen=True)
class SqueezeCoefficients:
    """Coefficients of ``chi_1 (v1 z1^2 + w1/z1^2) + chi_2 (v2 z2^2 + w2/z2^2)``."""

    v1: float
    w1: float
    v2: float
    w2: float
    law: str = "negativity"

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.v1, self.w1, self.v2, self.w2

    @property
    def positive(self) -> bool:
        return min(self.as_tuple()) > 0.0


@dataclass(frozen=True)
class ControlStrategy:
    """Which law to apply, on which modes, and when.

    ``schedule`` is ``"initial"``, ``"every-step"`` or an increasing
    sequence of application times (us) that are snapped to the sample grid.
    """

    law: str = "negativity"
    scope: str = "both"
    schedule: str | tuple[float, ...] = "initial"

    def __post_init__(self):
        if self.law not in LAWS:
            raise GaussianError(f"unknown control law {self.law!r}")
        if self.scope not in SCOPES:
            raise GaussianError(f"unknown control scope {self.scope!r}")
        if isinstance(self.schedule, str):
            if self.schedule not in ("initial", "every-step"):
                raise GaussianError(f"unknown schedule {self.schedule!r}")
        else:
            times = tuple(float(t) for t in self.schedule)
            if any(t < 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
                raise GaussianError("schedule times must be non-negative and strictly increasing")
            object.__setattr__(self, "schedule", times)

    @classmethod
    def none(cls) -> "ControlStrategy":
        return cls(law="none")

    @classmethod
    def evenly_spaced(cls, count: int, horizon: float, law="negativity", scope="both") -> "ControlStrategy":
        """``count`` controls at ``k * horizon / count``, the first at t = 0."""
        if count < 1:
            raise GaussianError("need at least one control")
        return cls(law, scope, tuple(k * horizon / count for k in range(count)))

    def flags(self, times: np.ndarray, dt: float) -> np.ndarray:
        """Boolean control mask over a uniform grid."""
        n = len(times)
        flags = np.zeros(n, dtype=np.uint8)
        if self.law == "none":
            return flags
        if self.schedule == "initial":
            flags[0] = 1
        elif self.schedule == "every-step":
            flags[:] = 1
        else:
            horizon = times[-1]
            for t in self.schedule:
                if t > horizon * (1 + 1e-12):
                    raise GaussianError(f"control time {t} beyond horizon {horizon}")
                flags[min(int(round(t / dt)), n - 1)] = 1
        return flags


# ---------------------------------------------------------------- coefficients


def _nf_params(nf) -> tuple[float, float, float, float]:
    if isinstance(nf, NormalForm):
        return nf.a, nf.b, nf.c_plus, nf.c_minus
    return tuple(float(x) for x in nf)


def pt_gap(a, b, c_plus, c_minus) -> float:
    """``u = sqrt(Delta_tilde^2 - 4 Det sigma)`` from normal-form parameters."""
    u2 = ((a * a - b * b) ** 2 + 4 * a * b * (c_plus ** 2 + c_minus ** 2)
          - 4 * c_plus * c_minus * (a * a + b * b))
    return math.sqrt(max(u2, 0.0))


def squeeze_coefficients(nf) -> SqueezeCoefficients:
    """Negativity-law coefficients for a normal form (or its 4 parameters)."""
    a, b, cp, cm = _nf_params(nf)
    u = pt_gap(a, b, cp, cm)
    if u <= _settings.DEGENERACY_TOL * max(1.0, a * a + b * b):
        raise NotEntangledError("u = 0: the negativity law is undefined for this state")
    coeffs = SqueezeCoefficients(
        a * (b * b - a * a + u) + 2 * cp * (a * cm - b * cp),
        a * (b * b - a * a + u) + 2 * cm * (a * cp - b * cm),
        b * (a * a - b * b + u) + 2 * cp * (b * cm - a * cp),
        b * (a * a - b * b + u) + 2 * cm * (b * cp - a * cm),
        law="negativity",
    )
    if not coeffs.positive:
        raise CoefficientSignError(
            f"non-positive negativity-law coefficient: {coeffs.as_tuple()}", coeffs
        )
    return coeffs


def sigma_squeeze_coefficients(nf) -> SqueezeCoefficients:
    """Coefficients of the separability-invariant law.

    These can vanish or turn negative (pure states give ``v1 = b - a``
    when ``a = b``); check :attr:`SqueezeCoefficients.positive`.
    """
    a, b, cp, cm = _nf_params(nf)
    return SqueezeCoefficients(
        b * (a * b - cp * cp) - a,
        b * (a * b - cm * cm) - a,
        a * (a * b - cp * cp) - b,
        a * (a * b - cm * cm) - b,
        law="sigma_tilde",
    )


def optimal_squeezings(coeffs) -> tuple[float, float]:
    """``z_j = (w_j / v_j) ** (1/4)``, the minimiser of ``v z^2 + w / z^2``.

    Accepts a :class:`SqueezeCoefficients` or a :class:`NormalForm` (the
    negativity law is then assumed).
    """
    if not isinstance(coeffs, SqueezeCoefficients):
        coeffs = squeeze_coefficients(coeffs)
    if not coeffs.positive:
        raise CoefficientSignError(f"no finite optimum for {coeffs.as_tuple()}", coeffs)
    return (coeffs.w1 / coeffs.v1) ** 0.25, (coeffs.w2 / coeffs.v2) ** 0.25


def xi_objective(coeffs: SqueezeCoefficients, baths: BathParams, z1: float, z2: float) -> float:
    """The controllable part of ``u * d(2 nu~^2)/dt`` for squeezings ``z1, z2``."""
    return (baths.chi1 * (coeffs.v1 * z1 ** 2 + coeffs.w1 / z1 ** 2)
            + baths.chi2 * (coeffs.v2 * z2 ** 2 + coeffs.w2 / z2 ** 2))


# ------------------------------------------------------------------- controls


def _entangled(cm: CovarianceMatrix) -> bool:
    return kernels.nu_tilde_minus(cm.matrix) < 1.0


def optimal_control_both(sigma) -> SymplecticTransform:
    """Local symplectic minimising the negativity decay rate.

    Normal-form reduction followed by the optimal squeezing on each mode.
    The identity is returned for separable states.  The result does not
    depend on the bath parameters.
    """
    cm = _as_cm(sigma)
    if not _entangled(cm):
        return SymplecticTransform.identity()
    nf = normal_form(cm)
    z1, z2 = optimal_squeezings(squeeze_coefficients(nf))
    squeeze = np.diag([z1, 1 / z1, z2, 1 / z2])
    return SymplecticTransform(squeeze @ nf.reducer.matrix)


def optimal_control_single(sigma, mode: int) -> SymplecticTransform:
    """Optimal control acting on ``mode`` only (identity on the other)."""
    if mode not in (1, 2):
        raise GaussianError(f"mode must be 1 or 2, got {mode}")
    cm = _as_cm(sigma)
    if not _entangled(cm):
        return SymplecticTransform.identity()
    nf = normal_form(cm)
    z1, z2 = optimal_squeezings(squeeze_coefficients(nf))
    r1, r2 = nf.reducer.blocks
    if mode == 1:
        return SymplecticTransform.local_pair(np.diag([z1, 1 / z1]) @ r1, None)
    return SymplecticTransform.local_pair(None, np.diag([z2, 1 / z2]) @ r2)


def sigma_control(sigma, scope: str = "both") -> SymplecticTransform:
    """Control minimising the separability-invariant rate.

    Raises :class:`CoefficientSignError` when a coefficient is not positive;
    the simulator instead clamps the squeezing (see :func:`simulate`).
    """
    cm = _as_cm(sigma)
    if not _entangled(cm):
        return SymplecticTransform.identity()
    nf = normal_form(cm)
    z1, z2 = optimal_squeezings(sigma_squeeze_coefficients(nf))
    s = np.diag([z1, 1 / z1, z2, 1 / z2]) @ nf.reducer.matrix
    if scope == "mode1":
        s[2:, 2:] = np.eye(2)
    elif scope == "mode2":
        s[:2, :2] = np.eye(2)
    return SymplecticTransform(s)


# ----------------------------------------------------------------- simulation


def time_grid(horizon: float, dt: float) -> np.ndarray:
    if dt <= 0 or horizon <= 0:
        raise GaussianError("dt and horizon must be positive")
    n = int(round(horizon / dt))
    if n < 1:
        raise GaussianError("horizon shorter than one time step")
    return dt * np.arange(n + 1)


def simulate(
    sigma0,
    baths: BathParams,
    strategy: ControlStrategy,
    horizon: float,
    dt: float,
    zmax: float | None = None,
) -> Trajectory:
    """Controlled evolution sampled on ``0, dt, ..., horizon``.

    At each scheduled sample the control law is evaluated on the current
    state and applied instantaneously; the state then evolves freely (and
    exactly) until the next sample.  Separable states are left alone.
    ``zmax`` bounds the squeezing of the ``sigma_tilde`` law.
    """
    cm = _as_cm(sigma0)
    times = time_grid(horizon, dt)
    flags = strategy.flags(times, dt)
    zmax = _settings.MAX_SQUEEZE if zmax is None else zmax
    law = _KERNEL_LAW.get(strategy.law, kernels.LAW_NEGATIVITY)
    states, controls, status = kernels.run_trajectory(
        cm.matrix, *baths.kernel_args(), dt, flags, law, _KERNEL_SCOPE[strategy.scope], zmax
    )
    bad = np.flatnonzero(status == kernels.STATUS_BAD_COEFFICIENTS)
    if len(bad):
        k = int(bad[0])
        raise CoefficientSignError(
            f"non-positive negativity-law coefficient at t = {times[k]:.6g} us"
        )
    clamped = np.flatnonzero(status == kernels.STATUS_CLAMPED)
    if len(clamped):
        warnings.warn(
            f"sigma_tilde law squeezing clamped to [1/{zmax:.4g}, {zmax:.4g}] "
            f"at {len(clamped)} samples (first at t = {times[clamped[0]]:.6g} us)",
            RuntimeWarning,
            stacklevel=2,
        )
    mask = flags.astype(bool) & (status != kernels.STATUS_SEPARABLE)
    return Trajectory(times, states, control_mask=mask, control_matrices=controls)


def crossing_time(traj: Trajectory, baths: BathParams, xtol: float = 1e-12) -> float | None:
    """First time the trajectory's ``nu_tilde_minus`` reaches 1.

    Located on the sampled grid and refined by bisection over the free
    evolution inside the bracketing interval.  ``None`` when it never
    happens within the trajectory.
    """
    nu = traj.nu_tilde_minus
    if nu[0] >= 1.0:
        return 0.0
    hits = np.flatnonzero(nu >= 1.0)
    if not len(hits):
        return None
    k = int(hits[0])
    start = traj.states[k - 1]
    t0 = traj.times[k - 1]
    step = traj.times[k] - t0
    args = baths.kernel_args()

    def excess(tau):
        return kernels.nu_tilde_minus(kernels.propagate(start, *args, tau)) - 1.0

    if excess(step) < 0.0:
        # the crossing sits exactly on the grid point up to rounding
        return float(traj.times[k])
    return float(t0 + bisect(excess, 0.0, step, xtol=xtol))


def death_time(
    sigma0,
    baths: BathParams,
    strategy: ControlStrategy,
    horizon: float,
    dt: float | None = None,
) -> float | None:
    """Entanglement sudden-death time (us), or ``None`` if beyond ``horizon``."""
    cm = _as_cm(sigma0)
    if not _entangled(cm):
        raise NotEntangledError("initial state is not entangled")
    dt = horizon / 2000 if dt is None else dt
    return crossing_time(simulate(cm, baths, strategy, horizon, dt), baths)


def schedule_comparison(
    sigma0,
    baths: BathParams,
    strategies: Sequence[ControlStrategy],
    horizon: float,
    dt: float,
) -> list[Trajectory]:
    """Simulate several strategies on a shared grid."""
    return [simulate(sigma0, baths, s, horizon, dt) for s in strategies]
