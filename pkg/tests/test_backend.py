import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussctl import _pykernels as py
from gaussctl._backend import BACKEND, compiled_kernels
from gaussctl.core import make_from_normal_form, make_two_mode_squeezed, make_thermal

from conftest import F3, F5, TMSV_R, physical_states

cy = compiled_kernels
needs_cy = pytest.mark.skipif(cy is None, reason="compiled kernels not built")
ARGS = (0.1, 0.3, 1.4, 2.2)


def test_backend_name():
    assert BACKEND in ("cython", "python")


@needs_cy
@given(physical_states())
def test_scalar_kernels_agree(sigma):
    m = sigma.matrix
    assert cy.nu_tilde_minus(m) == pytest.approx(py.nu_tilde_minus(m), rel=1e-12)
    assert np.allclose(cy.pt_invariants(m), py.pt_invariants(m), rtol=1e-12, atol=1e-12)
    assert np.allclose(cy.propagate(m, *ARGS, 1.7), py.propagate(m, *ARGS, 1.7), rtol=1e-13, atol=1e-13)
    a, b = cy.simon_reduce(m), py.simon_reduce(m)
    assert np.allclose(a[:4], b[:4], rtol=1e-10, atol=1e-10)
    # reducers may differ by a rotation when the correlations nearly vanish
    target = make_from_normal_form(*b[:4]).matrix
    for red in (a[4], b[4]):
        assert np.allclose(red @ m @ red.T, target, atol=1e-9 * np.abs(m).max())


@needs_cy
@pytest.mark.parametrize("law", [py.LAW_NEGATIVITY, py.LAW_SIGMA])
@pytest.mark.parametrize("scope", [0, 1, 2])
def test_control_matrix_agrees(law, scope):
    m = make_from_normal_form(*F3).matrix
    a, b = cy.control_matrix(m, law, scope, np.exp(4)), py.control_matrix(m, law, scope, np.exp(4))
    assert a[1] == b[1] == py.STATUS_OK
    assert np.allclose(a[0], b[0], rtol=1e-11, atol=1e-12)


@needs_cy
@pytest.mark.parametrize("m,law,status", [
    (make_thermal(2.0, 2.0).matrix, py.LAW_NEGATIVITY, py.STATUS_SEPARABLE),
    (make_two_mode_squeezed(TMSV_R).matrix, py.LAW_SIGMA, py.STATUS_CLAMPED),
])
def test_control_status_agrees(m, law, status):
    assert cy.control_matrix(m, law, 0, np.exp(4))[1] == status
    assert py.control_matrix(m, law, 0, np.exp(4))[1] == status


@needs_cy
@given(st.sampled_from([F3, F5]), st.sampled_from([py.LAW_NEGATIVITY, py.LAW_SIGMA]),
       st.sampled_from([0, 1, 2]), st.booleans())
def test_trajectories_agree(nf, law, scope, every):
    m = make_from_normal_form(*nf).matrix
    flags = np.ones(301, dtype=np.uint8) if every else np.eye(1, 301, 0, dtype=np.uint8)[0]
    a = cy.run_trajectory(m, *ARGS, 0.02, flags, law, scope, np.exp(4))
    b = py.run_trajectory(m, *ARGS, 0.02, flags, law, scope, np.exp(4))
    assert np.allclose(a[0], b[0], rtol=1e-9, atol=1e-10)
    assert np.allclose(a[1], b[1], rtol=1e-9, atol=1e-10)
    assert np.array_equal(np.asarray(a[2]), np.asarray(b[2]))


def test_pure_python_fallback_importable(monkeypatch):
    import importlib

    import gaussctl._backend as backend
    monkeypatch.setenv("GAUSSCTL_PURE_PYTHON", "1")
    try:
        mod = importlib.reload(backend)
        assert mod.BACKEND == "python" and mod.kernels is py
    finally:
        monkeypatch.delenv("GAUSSCTL_PURE_PYTHON")
        importlib.reload(backend)
