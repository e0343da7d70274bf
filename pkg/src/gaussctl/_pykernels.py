"""Pure-Python implementation of the hot kernels.

This module mirrors ``_ckernels.pyx`` function for function and is used
whenever the compiled extension is unavailable.  Matrices travel as flat
row-major lists of 16 floats internally; the public functions accept any
4x4 array-like and return numpy arrays.
"""
import math

import numpy as np

LAW_NEGATIVITY = 1
LAW_SIGMA = 2

SCOPE_BOTH = 0
SCOPE_MODE1 = 1
SCOPE_MODE2 = 2

STATUS_OK = 0
STATUS_SEPARABLE = 1
STATUS_CLAMPED = 2
STATUS_BAD_COEFFICIENTS = 3

_IDENTITY = [1.0, 0.0, 0.0, 0.0,
             0.0, 1.0, 0.0, 0.0,
             0.0, 0.0, 1.0, 0.0,
             0.0, 0.0, 0.0, 1.0]


def _flat(s):
    return [float(x) for x in np.asarray(s, dtype=float).reshape(16)]


def _det4(m):
    s0 = m[0] * m[5] - m[4] * m[1]
    s1 = m[0] * m[6] - m[4] * m[2]
    s2 = m[0] * m[7] - m[4] * m[3]
    s3 = m[1] * m[6] - m[5] * m[2]
    s4 = m[1] * m[7] - m[5] * m[3]
    s5 = m[2] * m[7] - m[6] * m[3]
    c5 = m[10] * m[15] - m[14] * m[11]
    c4 = m[9] * m[15] - m[13] * m[11]
    c3 = m[9] * m[14] - m[13] * m[10]
    c2 = m[8] * m[15] - m[12] * m[11]
    c1 = m[8] * m[14] - m[12] * m[10]
    c0 = m[8] * m[13] - m[12] * m[9]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


def _pt_invariants(m):
    det_a = m[0] * m[5] - m[1] * m[4]
    det_b = m[10] * m[15] - m[11] * m[14]
    det_c = m[2] * m[7] - m[3] * m[6]
    return _det4(m), det_a + det_b - 2.0 * det_c


def _nu_minus(m):
    d, dt = _pt_invariants(m)
    u = math.sqrt(max(dt * dt - 4.0 * d, 0.0))
    # rationalised form, stable when dt ~ u (nearly pure states)
    return math.sqrt(2.0 * d / (dt + u))


def _matmul(a, b):
    out = [0.0] * 16
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += a[4 * i + k] * b[4 * k + j]
            out[4 * i + j] = acc
    return out


def _conjugate(s, m):
    """``s @ m @ s.T`` on flat lists."""
    sm = _matmul(s, m)
    out = [0.0] * 16
    for i in range(4):
        for j in range(i, 4):
            acc = 0.0
            for k in range(4):
                acc += sm[4 * i + k] * s[4 * j + k]
            out[4 * i + j] = acc
            out[4 * j + i] = acc
    return out


def _propagate(m, g1, g2, k1, k2, t):
    e1 = math.exp(-g1 * t)
    e2 = math.exp(-g2 * t)
    e12 = math.exp(-0.5 * (g1 + g2) * t)
    out = [0.0] * 16
    for i in range(4):
        for j in range(4):
            idx = 4 * i + j
            if i < 2 and j < 2:
                fix = k1 if i == j else 0.0
                out[idx] = fix + (m[idx] - fix) * e1
            elif i >= 2 and j >= 2:
                fix = k2 if i == j else 0.0
                out[idx] = fix + (m[idx] - fix) * e2
            else:
                out[idx] = m[idx] * e12
    return out


def _normalizer(p, q, r):
    """Symmetric 2x2 symplectic taking [[p, q], [q, r]] to sqrt(det) * I."""
    d = math.sqrt(p * r - q * q)
    tau = math.sqrt(p + r + 2.0 * d)
    f = 1.0 / (math.sqrt(d) * tau)
    return (r + d) * f, -q * f, -q * f, (p + d) * f


def _reduce(m):
    """Simon reduction; returns (a, b, c_plus, c_minus, reducer)."""
    n1 = _normalizer(m[0], m[1], m[5])
    n2 = _normalizer(m[10], m[11], m[15])
    # correlation block in the normalised frame: n1 @ gamma @ n2.T
    g00, g01, g10, g11 = m[2], m[3], m[6], m[7]
    h00 = n1[0] * g00 + n1[1] * g10
    h01 = n1[0] * g01 + n1[1] * g11
    h10 = n1[2] * g00 + n1[3] * g10
    h11 = n1[2] * g01 + n1[3] * g11
    p00 = h00 * n2[0] + h01 * n2[1]
    p01 = h00 * n2[2] + h01 * n2[3]
    p10 = h10 * n2[0] + h11 * n2[1]
    p11 = h10 * n2[2] + h11 * n2[3]
    # rotation-only SVD: P = R(phi) diag(d1, d2) R(theta)
    e = 0.5 * (p00 + p11)
    f = 0.5 * (p00 - p11)
    g = 0.5 * (p10 + p01)
    h = 0.5 * (p10 - p01)
    qq = math.hypot(e, h)
    rr = math.hypot(f, g)
    a1 = math.atan2(g, f)
    a2 = math.atan2(h, e)
    theta = 0.5 * (a2 - a1)
    phi = 0.5 * (a2 + a1)
    d1 = qq + rr
    d2 = qq - rr
    cp, sp = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    # mode 1: R(phi).T @ n1, mode 2: R(theta) @ n2
    t1 = [cp * n1[0] + sp * n1[2], cp * n1[1] + sp * n1[3],
          -sp * n1[0] + cp * n1[2], -sp * n1[1] + cp * n1[3]]
    t2 = [ct * n2[0] - st * n2[2], ct * n2[1] - st * n2[3],
          st * n2[0] + ct * n2[2], st * n2[1] + ct * n2[3]]
    if d2 < 0.0 and qq > 0.0:
        # gauge |c_minus| >= c_plus: -J on mode 1, J on mode 2
        t1 = [-t1[2], -t1[3], t1[0], t1[1]]
        t2 = [t2[2], t2[3], -t2[0], -t2[1]]
        d1, d2 = -d2, -d1
    red = [t1[0], t1[1], 0.0, 0.0,
           t1[2], t1[3], 0.0, 0.0,
           0.0, 0.0, t2[0], t2[1],
           0.0, 0.0, t2[2], t2[3]]
    a = math.sqrt(m[0] * m[5] - m[1] * m[4])
    b = math.sqrt(m[10] * m[15] - m[11] * m[14])
    return a, b, d1, d2, red


def _negativity_coefficients(a, b, cp, cm):
    u2 = ((a * a - b * b) ** 2 + 4.0 * a * b * (cp * cp + cm * cm)
          - 4.0 * cp * cm * (a * a + b * b))
    u = math.sqrt(max(u2, 0.0))
    v1 = a * (b * b - a * a + u) + 2.0 * cp * (a * cm - b * cp)
    w1 = a * (b * b - a * a + u) + 2.0 * cm * (a * cp - b * cm)
    v2 = b * (a * a - b * b + u) + 2.0 * cp * (b * cm - a * cp)
    w2 = b * (a * a - b * b + u) + 2.0 * cm * (b * cp - a * cm)
    return v1, w1, v2, w2


def _sigma_coefficients(a, b, cp, cm):
    return (b * (a * b - cp * cp) - a, b * (a * b - cm * cm) - a,
            a * (a * b - cp * cp) - b, a * (a * b - cm * cm) - b)


def _clamped_z(v, w, zmax):
    """Minimiser of v z^2 + w / z^2 on [1/zmax, zmax]; flag set if clamped."""
    if v > 0.0 and w > 0.0:
        z = (w / v) ** 0.25
        if z > zmax:
            return zmax, True
        if z < 1.0 / zmax:
            return 1.0 / zmax, True
        return z, False
    if v * zmax * zmax + w / (zmax * zmax) <= v / (zmax * zmax) + w * zmax * zmax:
        return zmax, True
    return 1.0 / zmax, True


def _control(m, law, scope, zmax):
    if _nu_minus(m) >= 1.0:
        return list(_IDENTITY), STATUS_SEPARABLE
    a, b, cp, cm, red = _reduce(m)
    status = STATUS_OK
    if law == LAW_NEGATIVITY:
        v1, w1, v2, w2 = _negativity_coefficients(a, b, cp, cm)
        if v1 <= 0.0 or w1 <= 0.0 or v2 <= 0.0 or w2 <= 0.0:
            return list(_IDENTITY), STATUS_BAD_COEFFICIENTS
        z1 = (w1 / v1) ** 0.25
        z2 = (w2 / v2) ** 0.25
    else:
        v1, w1, v2, w2 = _sigma_coefficients(a, b, cp, cm)
        z1, c1 = _clamped_z(v1, w1, zmax)
        z2, c2 = _clamped_z(v2, w2, zmax)
        if c1 or c2:
            status = STATUS_CLAMPED
    s = [0.0] * 16
    if scope != SCOPE_MODE2:
        for j in range(2):
            s[j] = z1 * red[j]
            s[4 + j] = red[4 + j] / z1
    else:
        s[0] = s[5] = 1.0
    if scope != SCOPE_MODE1:
        for j in range(2, 4):
            s[8 + j] = z2 * red[8 + j]
            s[12 + j] = red[12 + j] / z2
    else:
        s[10] = s[15] = 1.0
    return s, status


# --------------------------------------------------------------------------
# public surface


def nu_tilde_minus(s):
    """Smallest partially transposed symplectic eigenvalue (closed form)."""
    return _nu_minus(_flat(s))


def pt_invariants(s):
    """Return ``(det_sigma, delta_tilde)``."""
    return _pt_invariants(_flat(s))


def propagate(s, g1, g2, k1, k2, t):
    """Exact thermal-loss evolution; ``k_i`` is the ratio chi_i / gamma_i."""
    return np.array(_propagate(_flat(s), g1, g2, k1, k2, t)).reshape(4, 4)


def simon_reduce(s):
    a, b, cp, cm, red = _reduce(_flat(s))
    return a, b, cp, cm, np.array(red).reshape(4, 4)


def control_matrix(s, law, scope, zmax):
    mat, status = _control(_flat(s), law, scope, zmax)
    return np.array(mat).reshape(4, 4), status


def run_trajectory(s0, g1, g2, k1, k2, dt, flags, law, scope, zmax):
    """Alternate scheduled controls with free evolution over a uniform grid.

    ``flags[k]`` marks a control at sample ``k``.  Returns the recorded
    (post-control) states, the applied control matrices and a per-sample
    status code.
    """
    n = len(flags)
    states = np.empty((n, 4, 4))
    controls = np.empty((n, 4, 4))
    status = np.zeros(n, dtype=np.int64)
    m = _flat(s0)
    for k in range(n):
        if flags[k]:
            c, st = _control(m, law, scope, zmax)
            status[k] = st
            if st == STATUS_BAD_COEFFICIENTS:
                states[k:] = np.nan
                controls[k:] = np.nan
                return states, controls, status
            if st != STATUS_SEPARABLE:
                m = _conjugate(c, m)
        else:
            c = _IDENTITY
        states[k] = np.array(m).reshape(4, 4)
        controls[k] = np.array(c).reshape(4, 4)
        if k + 1 < n:
            m = _propagate(m, g1, g2, k1, k2, dt)
    return states, controls, status
