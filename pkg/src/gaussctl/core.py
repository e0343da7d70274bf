"""Two-mode covariance-matrix algebra.

Conventions: quadratures are ordered ``(x1, p1, x2, p2)`` and the vacuum
covariance matrix is the identity, so the uncertainty relation reads
``nu >= 1`` for every symplectic eigenvalue.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gaussctl import _settings
from gaussctl._backend import kernels
from gaussctl.errors import (
    EigenSolverError,
    GaussianError,
    NonPhysicalStateError,
    NotSymplecticError,
)

OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA = np.kron(np.eye(2), OMEGA2)
#: partial transposition of mode 1
PT = np.diag([1.0, -1.0, 1.0, 1.0])


def _frozen(array, shape):
    arr = np.array(array, dtype=float)
    if arr.size == np.prod(shape):
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise GaussianError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GaussianError("matrix entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real symmetric 4x4 second-moment matrix of a two-mode Gaussian state.

    The matrix is stored read-only.  Construction checks symmetry only;
    use :func:`check_physical` to enforce the uncertainty relation.
    """

    matrix: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.matrix, (4, 4))
        scale = max(1.0, float(np.abs(arr).max()))
        if np.abs(arr - arr.T).max() > _settings.SYMMETRY_TOL * scale:
            raise GaussianError("covariance matrix is not symmetric")
        sym = 0.5 * (arr + arr.T)
        sym.setflags(write=False)
        object.__setattr__(self, "matrix", sym)

    @property
    def alpha(self) -> np.ndarray:
        """Mode-1 block."""
        return self.matrix[:2, :2]

    @property
    def beta(self) -> np.ndarray:
        """Mode-2 block."""
        return self.matrix[2:, 2:]

    @property
    def gamma(self) -> np.ndarray:
        """Correlation block (rows mode 1, columns mode 2)."""
        return self.matrix[:2, 2:]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def allclose(self, other, atol=1e-12, rtol=0.0) -> bool:
        return bool(np.allclose(self.matrix, np.asarray(other), atol=atol, rtol=rtol))

    def to_list(self) -> list[float]:
        """Row-major list of the 16 entries."""
        return [float(x) for x in self.matrix.ravel()]

    @classmethod
    def from_list(cls, values) -> "CovarianceMatrix":
        values = list(values)
        if len(values) != 16:
            raise GaussianError(f"expected 16 entries, got {len(values)}")
        return cls(np.array(values, dtype=float).reshape(4, 4))

    def __repr__(self):
        return f"CovarianceMatrix({np.array2string(self.matrix, precision=6)})"


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """A 2x2 (single-mode) or 4x4 (two-mode) real symplectic matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=float)
        if arr.shape not in ((2, 2), (4, 4)):
            raise NotSymplecticError(f"unsupported shape {arr.shape}")
        arr = _frozen(arr, arr.shape)
        omega = OMEGA2 if arr.shape == (2, 2) else OMEGA
        scale = max(1.0, float(np.abs(arr).max()) ** 2)
        if np.abs(arr @ omega @ arr.T - omega).max() > _settings.SYMPLECTIC_TOL * scale:
            raise NotSymplecticError("S Omega S^T != Omega")
        object.__setattr__(self, "matrix", arr)

    @property
    def local(self) -> bool:
        """True for block-diagonal ``S1 (+) S2`` (always true for 2x2)."""
        if self.matrix.shape == (2, 2):
            return True
        return not (np.any(self.matrix[:2, 2:]) or np.any(self.matrix[2:, :2]))

    @property
    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        if self.matrix.shape == (2, 2):
            raise GaussianError("single-mode transform has no mode blocks")
        return self.matrix[:2, :2], self.matrix[2:, 2:]

    def __matmul__(self, other: "SymplecticTransform") -> "SymplecticTransform":
        return SymplecticTransform(self.matrix @ other.matrix)

    def inverse(self) -> "SymplecticTransform":
        omega = OMEGA2 if self.matrix.shape == (2, 2) else OMEGA
        # S^-1 = -Omega S^T Omega for symplectic S
        return SymplecticTransform(-omega @ self.matrix.T @ omega)

    @classmethod
    def identity(cls, modes: int = 2) -> "SymplecticTransform":
        return cls(np.eye(2 * modes))

    @classmethod
    def local_pair(cls, s1=None, s2=None) -> "SymplecticTransform":
        """``s1 (+) s2``; ``None`` stands for the identity on that mode."""
        mat = np.eye(4)
        if s1 is not None:
            mat[:2, :2] = np.asarray(getattr(s1, "matrix", s1))
        if s2 is not None:
            mat[2:, 2:] = np.asarray(getattr(s2, "matrix", s2))
        return cls(mat)

    @classmethod
    def squeeze(cls, z: float, mode: int | None = None) -> "SymplecticTransform":
        """``diag(z, 1/z)``, embedded on ``mode`` (1 or 2) when given."""
        single = np.diag([z, 1.0 / z])
        return cls(single) if mode is None else cls.on_mode(single, mode)

    @classmethod
    def rotation(cls, theta: float, mode: int | None = None) -> "SymplecticTransform":
        """Phase rotation by ``theta``."""
        c, s = math.cos(theta), math.sin(theta)
        single = np.array([[c, s], [-s, c]])
        return cls(single) if mode is None else cls.on_mode(single, mode)

    @classmethod
    def on_mode(cls, single, mode: int) -> "SymplecticTransform":
        if mode == 1:
            return cls.local_pair(single, None)
        if mode == 2:
            return cls.local_pair(None, single)
        raise GaussianError(f"mode must be 1 or 2, got {mode}")


@dataclass(frozen=True)
class NormalForm:
    """Simon normal-form parameters plus the local reducer that reaches them."""

    a: float
    b: float
    c_plus: float
    c_minus: float
    reducer: SymplecticTransform

    def matrix(self) -> CovarianceMatrix:
        return make_from_normal_form(self.a, self.b, self.c_plus, self.c_minus)

    def as_dict(self) -> dict[str, float]:
        return {"a": self.a, "b": self.b, "c_plus": self.c_plus, "c_minus": self.c_minus}


@dataclass(frozen=True)
class InvariantSet:
    det_sigma: float
    delta: float
    delta_tilde: float
    sigma_tilde: float
    u: float

    @property
    def entangled(self) -> bool:
        return self.sigma_tilde < 0.0


def _as_cm(sigma) -> CovarianceMatrix:
    return sigma if isinstance(sigma, CovarianceMatrix) else CovarianceMatrix(sigma)


# ---------------------------------------------------------------- constructors


def make_from_normal_form(a, b, c_plus, c_minus) -> CovarianceMatrix:
    vals = (a, b, c_plus, c_minus)
    if not all(math.isfinite(float(v)) for v in vals):
        raise GaussianError(f"normal-form parameters must be finite: {vals}")
    m = np.diag([a, a, b, b]).astype(float)
    m[0, 2] = m[2, 0] = c_plus
    m[1, 3] = m[3, 1] = c_minus
    return CovarianceMatrix(m)


def make_two_mode_squeezed(r: float) -> CovarianceMatrix:
    """Pure two-mode squeezed vacuum with squeezing parameter ``r >= 0``."""
    if r < 0:
        raise GaussianError("squeezing parameter must be non-negative")
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    return make_from_normal_form(ch, ch, sh, -sh)


def make_thermal(n1: float, n2: float) -> CovarianceMatrix:
    """Product of thermal states with variances ``n1`` and ``n2`` (>= 1)."""
    return CovarianceMatrix(np.diag([n1, n1, n2, n2]))


# -------------------------------------------------------------- spectral data


def symplectic_eigenvalues(sigma) -> tuple[float, float]:
    """Moduli of the eigenvalues of ``Omega sigma``, ascending, one per pair.

    With ``sigma = L L^T``, ``i Omega sigma`` is similar to the Hermitian
    ``i L^T Omega L``; ``eigvalsh`` stays stable on degenerate spectra where
    the general solver can fail.
    """
    m = _as_cm(sigma).matrix
    try:
        low = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NonPhysicalStateError("covariance matrix is not positive definite") from None
    try:
        ev = np.linalg.eigvalsh(1j * (low.T @ OMEGA @ low))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigenSolverError("eigen-solver returned non-finite values")
    mod = np.sort(np.abs(ev))
    return float(mod[0]), float(mod[2])


def is_physical(sigma, tol: float | None = None) -> bool:
    tol = _settings.PHYSICALITY_TOL if tol is None else tol
    m = _as_cm(sigma).matrix
    if np.linalg.eigvalsh(m).min() <= 0.0:
        return False
    try:
        return symplectic_eigenvalues(m)[0] >= 1.0 - tol
    except NonPhysicalStateError:
        return False


def check_physical(sigma, tol: float | None = None) -> CovarianceMatrix:
    """Return ``sigma`` as a CovarianceMatrix or raise NonPhysicalStateError."""
    cm = _as_cm(sigma)
    if not is_physical(cm, tol):
        raise NonPhysicalStateError("covariance matrix violates the uncertainty relation")
    return cm


def partial_transpose(sigma) -> CovarianceMatrix:
    """Flip the sign of ``p1``: ``T sigma T`` with ``T = diag(1, -1, 1, 1)``."""
    return CovarianceMatrix(PT @ _as_cm(sigma).matrix @ PT)


def invariants(sigma) -> InvariantSet:
    cm = _as_cm(sigma)
    det_a = float(np.linalg.det(cm.alpha))
    det_b = float(np.linalg.det(cm.beta))
    det_c = float(np.linalg.det(cm.gamma))
    det_s, delta_tilde = kernels.pt_invariants(cm.matrix)
    u2 = delta_tilde ** 2 - 4.0 * det_s
    return InvariantSet(
        det_sigma=det_s,
        delta=det_a + det_b + 2.0 * det_c,
        delta_tilde=delta_tilde,
        sigma_tilde=det_s - delta_tilde + 1.0,
        u=math.sqrt(max(u2, 0.0)),
    )


def pt_min_eigenvalue(sigma) -> float:
    """Smallest partially transposed symplectic eigenvalue.

    Uses the closed form in the PT invariants, falling back to the
    eigen-solver when the two PT eigenvalues are degenerate.
    """
    cm = _as_cm(sigma)
    det_s, delta_tilde = kernels.pt_invariants(cm.matrix)
    u2 = delta_tilde ** 2 - 4.0 * det_s
    scale = max(1.0, delta_tilde ** 2)
    if u2 < -_settings.PHYSICALITY_TOL * scale or det_s <= 0.0:
        raise NonPhysicalStateError("PT invariants incompatible with a physical state")
    if u2 <= _settings.DEGENERACY_TOL * scale:
        return symplectic_eigenvalues(partial_transpose(cm))[0]
    return kernels.nu_tilde_minus(cm.matrix)


def log_negativity(sigma) -> float:
    """Logarithmic negativity in ebits."""
    return max(0.0, -math.log2(pt_min_eigenvalue(sigma)))


# ----------------------------------------------------------- transformations


def apply_symplectic(sigma, s) -> CovarianceMatrix:
    """Congruence ``S sigma S^T``; ``s`` may be a 4x4 array or a transform."""
    if not isinstance(s, SymplecticTransform):
        s = SymplecticTransform(s)
    mat = s.matrix
    if mat.shape == (2, 2):
        raise GaussianError("embed single-mode transforms with SymplecticTransform.on_mode")
    return CovarianceMatrix(mat @ _as_cm(sigma).matrix @ mat.T)


def normal_form(sigma) -> NormalForm:
    """Reduce ``sigma`` to Simon normal form by local symplectics.

    The returned parameters satisfy ``c_plus >= c_minus``; when the
    correlations have opposite signs the gauge ``|c_minus| >= c_plus`` is
    also fixed, so the result depends on local invariants only.
    """
    cm = check_physical(sigma)
    a, b, cp, cminus, red = kernels.simon_reduce(cm.matrix)
    return NormalForm(float(a), float(b), float(cp), float(cminus), SymplecticTransform(red))


def same_normal_form(p, q, atol=1e-8) -> bool:
    """Compare normal-form parameter tuples modulo the local gauge freedom.

    ``(c+, c-)`` is equivalent to ``(-c-, -c+)`` under local rotations.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    swapped = np.array([q[0], q[1], -q[3], -q[2]])
    return bool(np.allclose(p, q, atol=atol) or np.allclose(p, swapped, atol=atol))


# -------------------------------------------------------------- serialization


def to_record(sigma) -> dict:
    """Serializable form: row-major entries plus labeled normal-form data."""
    cm = _as_cm(sigma)
    record = {"matrix": cm.to_list()}
    if is_physical(cm):
        record["normal_form"] = normal_form(cm).as_dict()
    return record


def from_record(record: dict) -> CovarianceMatrix:
    if "matrix" in record:
        return CovarianceMatrix.from_list(record["matrix"])
    nf = record["normal_form"]
    return make_from_normal_form(nf["a"], nf["b"], nf["c_plus"], nf["c_minus"])
