"""Independent thermal-loss channels on each mode.

Time is measured in microseconds and rates in 1/us throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from gaussctl import _settings
from gaussctl._backend import kernels
from gaussctl.core import CovarianceMatrix, SymplecticTransform, _as_cm
from gaussctl.errors import GaussianError, NotEntangledError

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K


class ModeBath(NamedTuple):
    gamma: float
    chi: float
    occupation: float


@dataclass(frozen=True)
class BathParams:
    """Loss rates ``gamma_i`` and diffusion rates ``chi_i = gamma_i (2 N_i + 1)``."""

    gamma1: float
    gamma2: float
    chi1: float
    chi2: float

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "chi1", "chi2"):
            if not math.isfinite(getattr(self, name)):
                raise GaussianError(f"{name} must be finite")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise GaussianError("loss rates must be positive")
        # chi >= gamma up to rounding of ratio-built parameters
        if self.chi1 < self.gamma1 * (1 - 1e-12) or self.chi2 < self.gamma2 * (1 - 1e-12):
            raise GaussianError("diffusion rates must satisfy chi_i >= gamma_i")

    @classmethod
    def from_ratios(cls, gamma1, gamma2, ratio1, ratio2) -> "BathParams":
        """Build from ``chi_i / gamma_i`` (= 2 N_i + 1)."""
        return cls(gamma1, gamma2, gamma1 * ratio1, gamma2 * ratio2)

    @classmethod
    def symmetric(cls, gamma, ratio) -> "BathParams":
        return cls.from_ratios(gamma, gamma, ratio, ratio)

    @classmethod
    def from_occupations(cls, gamma1, gamma2, n1, n2) -> "BathParams":
        if n1 < 0 or n2 < 0:
            raise GaussianError("thermal occupations must be non-negative")
        return cls.from_ratios(gamma1, gamma2, 2 * n1 + 1, 2 * n2 + 1)

    @classmethod
    def from_modes(cls, m1: ModeBath, m2: ModeBath) -> "BathParams":
        return cls(m1.gamma, m2.gamma, m1.chi, m2.chi)

    @property
    def ratio1(self) -> float:
        return self.chi1 / self.gamma1

    @property
    def ratio2(self) -> float:
        return self.chi2 / self.gamma2

    @property
    def is_symmetric(self) -> bool:
        return self.gamma1 == self.gamma2 and self.chi1 == self.chi2

    def kernel_args(self) -> tuple[float, float, float, float]:
        return self.gamma1, self.gamma2, self.ratio1, self.ratio2

    def stationary_state(self) -> CovarianceMatrix:
        return CovarianceMatrix(np.diag([self.ratio1] * 2 + [self.ratio2] * 2))


def bath_from_temperature(gamma: float, omega: float, temperature: float) -> ModeBath:
    """Bath entry for a mode of angular frequency ``omega`` (rad/s) at ``temperature`` (K).

    The vacuum bath is ``BathParams.from_occupations(..., 0, 0)``; a zero
    temperature is rejected here rather than reached by division.
    """
    if not (omega > 0 and math.isfinite(omega)):
        raise GaussianError("mode frequency must be positive and finite")
    if not (temperature > 0 and math.isfinite(temperature)):
        raise GaussianError("temperature must be positive and finite")
    x = HBAR * omega / (K_B * temperature)
    # beyond ~700 expm1 overflows while N is already below 1e-300
    n = 0.0 if x > 700.0 else 1.0 / math.expm1(x)
    return ModeBath(gamma, gamma * (2 * n + 1), n)


def propagate(sigma0, baths: BathParams, t: float) -> CovarianceMatrix:
    """Exact state at time ``t >= 0`` under free evolution."""
    if t < 0:
        raise GaussianError("propagation time must be non-negative")
    cm = _as_cm(sigma0)
    return CovarianceMatrix(kernels.propagate(cm.matrix, *baths.kernel_args(), t))


def derivative(sigma, baths: BathParams) -> np.ndarray:
    """``A sigma + sigma A^T + D`` for the thermal-loss generator."""
    m = _as_cm(sigma).matrix
    a = -0.5 * np.diag([baths.gamma1] * 2 + [baths.gamma2] * 2)
    d = np.diag([baths.chi1] * 2 + [baths.chi2] * 2)
    return a @ m + m @ a.T + d


def det_sigma_rate(sigma, baths: BathParams) -> float:
    """Time derivative of ``Det sigma``.

    Schur-complement form; the generic Jacobi formula is used instead when
    the correlation block is singular.
    """
    cm = _as_cm(sigma)
    al, be, ga = cm.alpha, cm.beta, cm.gamma
    det_s = float(np.linalg.det(cm.matrix))
    if abs(np.linalg.det(ga)) < _settings.SINGULAR_GAMMA_TOL:
        return det_s * float(np.trace(np.linalg.solve(cm.matrix, derivative(cm, baths))))
    schur_b = al - ga @ np.linalg.solve(be, ga.T)
    schur_a = be - ga.T @ np.linalg.solve(al, ga)
    return float(
        -2.0 * (baths.gamma1 + baths.gamma2) * det_s
        + baths.chi1 * np.linalg.det(be) * np.trace(schur_b)
        + baths.chi2 * np.linalg.det(al) * np.trace(schur_a)
    )


def delta_tilde_rate(sigma, baths: BathParams) -> float:
    cm = _as_cm(sigma)
    det_a = np.linalg.det(cm.alpha)
    det_b = np.linalg.det(cm.beta)
    det_c = np.linalg.det(cm.gamma)
    return float(
        -2.0 * baths.gamma1 * det_a
        - 2.0 * baths.gamma2 * det_b
        + 2.0 * (baths.gamma1 + baths.gamma2) * det_c
        + baths.chi1 * np.trace(cm.alpha)
        + baths.chi2 * np.trace(cm.beta)
    )


def nu_minus_rate(sigma, baths: BathParams) -> float:
    """Time derivative of ``2 nu_tilde_minus**2`` (chain rule through the PT invariants)."""
    cm = _as_cm(sigma)
    det_s, delta_tilde = kernels.pt_invariants(cm.matrix)
    u = math.sqrt(max(delta_tilde ** 2 - 4.0 * det_s, 0.0))
    if u <= _settings.DEGENERACY_TOL * max(1.0, delta_tilde):
        raise NotEntangledError("PT eigenvalues are degenerate (u = 0); rate undefined")
    return (2.0 / u) * det_sigma_rate(cm, baths) + (1.0 - delta_tilde / u) * delta_tilde_rate(cm, baths)


def nu_tilde_minus_rate(sigma, baths: BathParams) -> float:
    """Time derivative of ``nu_tilde_minus`` itself."""
    nu = kernels.nu_tilde_minus(_as_cm(sigma).matrix)
    return nu_minus_rate(sigma, baths) / (4.0 * nu)


@dataclass
class Trajectory:
    """Time-ordered record of a (possibly controlled) evolution.

    ``states[k]`` is the state at ``times[k]`` after any control applied at
    that instant.  ``control_mask[k]`` marks samples where a non-trivial
    control was applied and ``control_matrices[k]`` holds it.
    """

    times: np.ndarray
    states: np.ndarray
    control_mask: np.ndarray | None = None
    control_matrices: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if len(self.times) != len(self.states):
            raise GaussianError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise GaussianError("trajectory times must be strictly increasing")
        if self.control_mask is None:
            self.control_mask = np.zeros(len(self.times), dtype=bool)
        self.control_mask = np.asarray(self.control_mask, dtype=bool)
        self._derived = None

    def __len__(self):
        return len(self.times)

    def state(self, k: int) -> CovarianceMatrix:
        return CovarianceMatrix(self.states[k])

    @property
    def controls_applied(self) -> list[tuple[float, SymplecticTransform]]:
        return [
            (float(self.times[k]), SymplecticTransform(self.control_matrices[k]))
            for k in np.flatnonzero(self.control_mask)
        ]

    def _compute(self):
        if self._derived is None:
            m = self.states
            det_a = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
            det_b = m[:, 2, 2] * m[:, 3, 3] - m[:, 2, 3] * m[:, 3, 2]
            det_c = m[:, 0, 2] * m[:, 1, 3] - m[:, 0, 3] * m[:, 1, 2]
            det_s = np.linalg.det(m) if len(m) else np.empty(0)
            dtil = det_a + det_b - 2.0 * det_c
            u = np.sqrt(np.maximum(dtil ** 2 - 4.0 * det_s, 0.0))
            nu = np.sqrt(2.0 * det_s / (dtil + u))
            self._derived = {
                "nu_tilde_minus": nu,
                "det_sigma": det_s,
                "delta_tilde": dtil,
                "sigma_tilde": det_s - dtil + 1.0,
                "log_negativity": np.maximum(0.0, -np.log2(nu)),
            }
        return self._derived

    @property
    def nu_tilde_minus(self) -> np.ndarray:
        return self._compute()["nu_tilde_minus"]

    @property
    def log_negativity(self) -> np.ndarray:
        return self._compute()["log_negativity"]

    @property
    def sigma_tilde(self) -> np.ndarray:
        return self._compute()["sigma_tilde"]

    @property
    def det_sigma(self) -> np.ndarray:
        return self._compute()["det_sigma"]

    @property
    def delta_tilde(self) -> np.ndarray:
        return self._compute()["delta_tilde"]


def sample_free(sigma0, baths: BathParams, times) -> Trajectory:
    """Free evolution sampled at arbitrary increasing ``times`` (from t = 0)."""
    cm = _as_cm(sigma0)
    times = np.asarray(times, dtype=float)
    states = np.array([kernels.propagate(cm.matrix, *baths.kernel_args(), t) for t in times])
    return Trajectory(times, states)


__all__ = [
    "BathParams",
    "ModeBath",
    "Trajectory",
    "bath_from_temperature",
    "propagate",
    "derivative",
    "det_sigma_rate",
    "delta_tilde_rate",
    "nu_minus_rate",
    "nu_tilde_minus_rate",
    "sample_free",
]
