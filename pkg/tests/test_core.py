import math

import numpy as np
import pytest
from hypothesis import given

from gaussctl.core import (
    OMEGA,
    CovarianceMatrix,
    SymplecticTransform,
    apply_symplectic,
    check_physical,
    from_record,
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
    to_record,
)
from gaussctl.errors import (
    GaussianError,
    NonPhysicalStateError,
    NotSymplecticError,
)

from conftest import F3, F5, TMSV_R, local_symplectics, physical_states, single_mode


# ------------------------------------------------------------ construction


def test_tmsv_vacuum():
    assert np.array_equal(make_two_mode_squeezed(0.0).matrix, np.eye(4))


def test_tmsv_reference_parameters():
    m = make_two_mode_squeezed(TMSV_R).matrix
    assert m[0, 0] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert m[2, 2] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert m[0, 2] == pytest.approx(1.0, abs=1e-15)
    assert m[1, 3] == pytest.approx(-1.0, abs=1e-15)


def test_tmsv_is_pure():
    assert symplectic_eigenvalues(make_two_mode_squeezed(TMSV_R)) == pytest.approx((1.0, 1.0), abs=1e-12)


def test_tmsv_rejects_negative_r():
    with pytest.raises(GaussianError):
        make_two_mode_squeezed(-0.1)


def test_normal_form_identity():
    assert np.array_equal(make_from_normal_form(1, 1, 0, 0).matrix, np.eye(4))


@pytest.mark.parametrize("params", [F3, F5])
def test_reference_states_physical_and_entangled(params):
    m = make_from_normal_form(*params)
    assert is_physical(m)
    assert pt_min_eigenvalue(m) < 1.0


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_normal_form_rejects_nonfinite(bad):
    with pytest.raises(GaussianError):
        make_from_normal_form(1.0, bad, 0.0, 0.0)


def test_covariance_validation():
    with pytest.raises(GaussianError):
        CovarianceMatrix(np.eye(3))
    asym = np.eye(4)
    asym[0, 1] = 1e-6
    with pytest.raises(GaussianError):
        CovarianceMatrix(asym)
    m = CovarianceMatrix(np.eye(4))
    with pytest.raises(ValueError):
        m.matrix[0, 0] = 2.0


def test_blocks(f3):
    assert np.array_equal(f3.alpha, np.diag([4.5, 4.5]))
    assert np.array_equal(f3.beta, np.diag([3.5, 3.5]))
    assert np.array_equal(f3.gamma, np.diag([2.2, -3.5]))


def test_nonphysical_rejected():
    with pytest.raises(NonPhysicalStateError):
        check_physical(np.diag([0.5, 0.5, 1, 1]))
    # positive definite but below the uncertainty bound
    assert not is_physical(make_from_normal_form(1.0, 1.0, 0.5, 0.5))


# ------------------------------------------------------------ eigenvalues


def test_symplectic_eigenvalues_trivial():
    assert symplectic_eigenvalues(np.eye(4)) == pytest.approx((1, 1))
    assert symplectic_eigenvalues(make_thermal(3, 5)) == pytest.approx((3, 5))


def test_symplectic_eigenvalues_near_degenerate():
    # the general eigen-solver fails to converge on this input
    m = np.eye(4)
    m[0, 2] = m[2, 0] = m[1, 3] = m[3, 1] = 8.42454609e-14
    assert symplectic_eigenvalues(m) == pytest.approx((1.0, 1.0), abs=1e-12)
    assert is_physical(m)


def test_symplectic_eigenvalues_reject_indefinite():
    with pytest.raises(NonPhysicalStateError):
        symplectic_eigenvalues(np.diag([1.0, -1.0, 1.0, 1.0]))


def test_symplectic_eigenvalues_closed_form(f3):
    inv = invariants(f3)
    root = math.sqrt(inv.delta ** 2 - 4 * inv.det_sigma)
    closed = (math.sqrt((inv.delta - root) / 2), math.sqrt((inv.delta + root) / 2))
    assert symplectic_eigenvalues(f3) == pytest.approx(closed, rel=1e-9)


def test_partial_transpose_involution(f3):
    scrambled = apply_symplectic(f3, SymplecticTransform.local_pair(single_mode(0.3, 0.4, 1.1), None))
    twice = partial_transpose(partial_transpose(scrambled))
    assert np.array_equal(twice.matrix, scrambled.matrix)
    assert np.array_equal(partial_transpose(np.eye(4)).matrix, np.eye(4))


def test_partial_transpose_tmsv_sign_pattern():
    pt = partial_transpose(make_two_mode_squeezed(TMSV_R)).matrix
    assert pt[0, 2] == pytest.approx(1.0)
    assert pt[1, 3] == pytest.approx(1.0)


def test_partial_transpose_keeps_det(f3):
    assert np.linalg.det(partial_transpose(f3).matrix) == pytest.approx(np.linalg.det(f3.matrix), rel=1e-14)


def test_pt_min_eigenvalue_values():
    assert pt_min_eigenvalue(np.eye(4)) == pytest.approx(1.0, abs=1e-12)
    assert pt_min_eigenvalue(make_two_mode_squeezed(TMSV_R)) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    # frozen after cross-checking against the eigen-solver route
    assert pt_min_eigenvalue(make_from_normal_form(*F3)) == pytest.approx(0.9005052460, abs=1e-9)


def test_log_negativity_values():
    assert log_negativity(np.eye(4)) == 0.0
    assert log_negativity(make_two_mode_squeezed(TMSV_R)) == pytest.approx(-math.log2(math.sqrt(2) - 1), abs=1e-12)
    assert log_negativity(make_thermal(2.0, 7.0)) == 0.0


def test_invariants_values():
    vac = invariants(np.eye(4))
    assert (vac.det_sigma, vac.delta, vac.delta_tilde, vac.sigma_tilde, vac.u) == pytest.approx((1, 2, 2, 0, 0))
    tm = invariants(make_two_mode_squeezed(TMSV_R))
    assert tm.det_sigma == pytest.approx(1.0)
    assert tm.delta_tilde == pytest.approx(6.0)
    assert tm.sigma_tilde == pytest.approx(-4.0)
    assert tm.u == pytest.approx(math.sqrt(32))
    assert invariants(make_from_normal_form(*F3)).sigma_tilde < 0


@given(physical_states())
def test_closed_form_matches_eigen_solver(sigma):
    closed = pt_min_eigenvalue(sigma)
    numeric = symplectic_eigenvalues(partial_transpose(sigma))[0]
    assert closed == pytest.approx(numeric, rel=1e-8)


@given(physical_states())
def test_at_most_one_pt_eigenvalue_below_one(sigma):
    assert symplectic_eigenvalues(partial_transpose(sigma))[1] >= 1 - 1e-9


@given(physical_states())
def test_entanglement_criteria_agree(sigma):
    nu = pt_min_eigenvalue(sigma)
    st = invariants(sigma).sigma_tilde
    if abs(nu - 1) > 1e-9:
        assert (st < 0) == (nu < 1)


@given(physical_states(entangled=True))
def test_entangled_states_have_negative_det_gamma(sigma):
    nf = normal_form(sigma)
    assert nf.c_plus * nf.c_minus < 0
    assert np.linalg.det(sigma.gamma) < 0


@given(physical_states(), local_symplectics())
def test_log_negativity_local_invariance(sigma, s):
    assert abs(log_negativity(apply_symplectic(sigma, s)) - log_negativity(sigma)) < 1e-9


# ------------------------------------------------------------- symplectics


def test_symplectic_transform_checks():
    with pytest.raises(NotSymplecticError):
        SymplecticTransform(np.diag([2.0, 1.0, 1.0, 1.0]))
    with pytest.raises(NotSymplecticError):
        SymplecticTransform(np.eye(3))


@given(local_symplectics())
def test_symplectic_determinant_and_inverse(s):
    assert np.linalg.det(s.matrix) == pytest.approx(1.0, rel=1e-9)
    assert np.allclose((s @ s.inverse()).matrix, np.eye(4), atol=1e-9)
    assert s.local


def test_squeeze_and_rotation_embed():
    z = SymplecticTransform.squeeze(2.0, 2).matrix
    assert np.array_equal(z, np.diag([1, 1, 2, 0.5]))
    r = SymplecticTransform.rotation(math.pi / 2, 1).matrix
    assert np.allclose(r[:2, :2], [[0, 1], [-1, 0]])
    with pytest.raises(GaussianError):
        SymplecticTransform.on_mode(np.eye(2), 3)


def test_apply_identity_and_rejects_nonsymplectic(f3):
    assert np.array_equal(apply_symplectic(f3, np.eye(4)).matrix, f3.matrix)
    with pytest.raises(NotSymplecticError):
        apply_symplectic(f3, np.diag([2.0, 2.0, 1.0, 1.0]))


def test_single_mode_squeeze_trace(f3):
    z = 1.7
    out = apply_symplectic(f3, SymplecticTransform.squeeze(z, 1))
    assert np.trace(out.alpha) == pytest.approx(4.5 * (z ** 2 + 1 / z ** 2), rel=1e-14)


def test_global_symplectic_keeps_spectrum(f3):
    # beam-splitter-like mixing is symplectic but not local
    c, s = math.cos(0.4), math.sin(0.4)
    bs = np.array([[c, 0, s, 0], [0, c, 0, s], [-s, 0, c, 0], [0, -s, 0, c]])
    out = apply_symplectic(f3, bs)
    assert symplectic_eigenvalues(out) == pytest.approx(symplectic_eigenvalues(f3), rel=1e-10)
    assert not SymplecticTransform(bs).local


@given(physical_states(), local_symplectics())
def test_local_symplectic_keeps_local_invariants(sigma, s):
    out = apply_symplectic(sigma, s)
    for block in ("alpha", "beta", "gamma"):
        a = np.linalg.det(getattr(sigma, block))
        b = np.linalg.det(getattr(out, block))
        assert b == pytest.approx(a, rel=1e-8, abs=1e-8)
    assert is_physical(out)


# ------------------------------------------------------------- normal form


def _close_to_pattern(m, nf, atol):
    return np.allclose(m, make_from_normal_form(nf.a, nf.b, nf.c_plus, nf.c_minus).matrix, atol=atol)


@pytest.mark.parametrize("params", [F3, F5, (2.0, 3.0, 1.0, 0.5), (3.0, 2.0, -1.0, -1.5)])
def test_normal_form_of_normal_form(params):
    nf = normal_form(make_from_normal_form(*params))
    assert same_normal_form((nf.a, nf.b, nf.c_plus, nf.c_minus), params, atol=1e-12)
    r = nf.reducer.matrix
    # identity up to local rotations
    assert np.allclose(r[:2, :2] @ r[:2, :2].T, np.eye(2), atol=1e-12)
    assert np.allclose(r[2:, 2:] @ r[2:, 2:].T, np.eye(2), atol=1e-12)


def test_normal_form_gauge_for_opposite_signs():
    nf = normal_form(make_from_normal_form(*F5))
    assert (nf.a, nf.b, nf.c_plus, nf.c_minus) == pytest.approx((5.0, 6.0, 4.8, -5.2), abs=1e-12)
    assert same_normal_form((nf.a, nf.b, nf.c_plus, nf.c_minus), F5)


def test_normal_form_recovers_squeezed_reference():
    squeezed = apply_symplectic(make_from_normal_form(*F3), SymplecticTransform.squeeze(2.0, 1))
    nf = normal_form(squeezed)
    assert (nf.a, nf.b, nf.c_plus, nf.c_minus) == pytest.approx(F3, abs=1e-12)


def test_normal_form_product_state():
    nf = normal_form(make_thermal(2.0, 3.0))
    assert (nf.c_plus, nf.c_minus) == (0.0, 0.0)


def test_normal_form_rejects_unphysical():
    with pytest.raises(NonPhysicalStateError):
        normal_form(np.diag([0.5, 0.5, 1, 1]))


@given(physical_states())
def test_normal_form_reducer_and_invariants(sigma):
    nf = normal_form(sigma)
    reduced = apply_symplectic(sigma, nf.reducer).matrix
    assert _close_to_pattern(reduced, nf, 1e-9 * max(1.0, np.abs(reduced).max()))
    assert nf.a >= 1 - 1e-9 and nf.b >= 1 - 1e-9 and nf.c_plus >= nf.c_minus
    assert nf.reducer.local
    rebuilt = nf.matrix()
    assert is_physical(rebuilt)
    for block in ("alpha", "beta", "gamma"):
        assert np.linalg.det(getattr(rebuilt, block)) == pytest.approx(
            np.linalg.det(getattr(sigma, block)), rel=1e-9, abs=1e-9)
    assert np.linalg.det(rebuilt.matrix) == pytest.approx(np.linalg.det(sigma.matrix), rel=1e-9)


@given(physical_states(), local_symplectics())
def test_normal_form_round_trip(sigma, s):
    p = normal_form(sigma)
    q = normal_form(apply_symplectic(sigma, s))
    assert same_normal_form((p.a, p.b, p.c_plus, p.c_minus), (q.a, q.b, q.c_plus, q.c_minus), atol=1e-8)


def test_tmsv_round_trip(rng):
    r = 0.7
    target = (math.cosh(2 * r), math.cosh(2 * r), math.sinh(2 * r), -math.sinh(2 * r))
    for _ in range(20):
        s = SymplecticTransform.local_pair(single_mode(*rng.uniform(-1.5, 1.5, 3)),
                                           single_mode(*rng.uniform(-1.5, 1.5, 3)))
        nf = normal_form(apply_symplectic(make_two_mode_squeezed(r), s))
        assert same_normal_form((nf.a, nf.b, nf.c_plus, nf.c_minus), target, atol=1e-8)


def test_record_round_trip(f3):
    rec = to_record(f3)
    assert rec["normal_form"] == pytest.approx({"a": 4.5, "b": 3.5, "c_plus": 2.2, "c_minus": -3.5})
    assert np.array_equal(from_record(rec).matrix, f3.matrix)
    assert np.allclose(from_record({"normal_form": rec["normal_form"]}).matrix, f3.matrix, atol=1e-12)
    assert len(rec["matrix"]) == 16


def test_omega_convention():
    assert np.array_equal(OMEGA[:2, :2], [[0, 1], [-1, 0]])
