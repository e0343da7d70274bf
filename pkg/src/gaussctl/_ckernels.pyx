# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; same API as :mod:`gaussctl._pykernels`."""
from libc.math cimport sqrt, exp, atan2, cos, sin, hypot, pow

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

cdef enum:
    _OK = 0
    _SEPARABLE = 1
    _CLAMPED = 2
    _BAD = 3


cdef inline void _load(object s, double* m) except *:
    cdef const double[:, ::1] v = np.ascontiguousarray(s, dtype=np.float64).reshape(4, 4)
    cdef int i, j
    for i in range(4):
        for j in range(4):
            m[4 * i + j] = v[i, j]


cdef object _store(const double* m):
    out = np.empty((4, 4))
    cdef double[:, ::1] v = out
    cdef int i, j
    for i in range(4):
        for j in range(4):
            v[i, j] = m[4 * i + j]
    return out


cdef inline void _identity(double* m) noexcept nogil:
    cdef int i
    for i in range(16):
        m[i] = 0.0
    m[0] = 1.0
    m[5] = 1.0
    m[10] = 1.0
    m[15] = 1.0


cdef inline double _det4(const double* m) noexcept nogil:
    cdef double s0 = m[0] * m[5] - m[4] * m[1]
    cdef double s1 = m[0] * m[6] - m[4] * m[2]
    cdef double s2 = m[0] * m[7] - m[4] * m[3]
    cdef double s3 = m[1] * m[6] - m[5] * m[2]
    cdef double s4 = m[1] * m[7] - m[5] * m[3]
    cdef double s5 = m[2] * m[7] - m[6] * m[3]
    cdef double c5 = m[10] * m[15] - m[14] * m[11]
    cdef double c4 = m[9] * m[15] - m[13] * m[11]
    cdef double c3 = m[9] * m[14] - m[13] * m[10]
    cdef double c2 = m[8] * m[15] - m[12] * m[11]
    cdef double c1 = m[8] * m[14] - m[12] * m[10]
    cdef double c0 = m[8] * m[13] - m[12] * m[9]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


cdef inline void _pt_inv(const double* m, double* d, double* dt) noexcept nogil:
    cdef double det_a = m[0] * m[5] - m[1] * m[4]
    cdef double det_b = m[10] * m[15] - m[11] * m[14]
    cdef double det_c = m[2] * m[7] - m[3] * m[6]
    d[0] = _det4(m)
    dt[0] = det_a + det_b - 2.0 * det_c


cdef inline double _nu_minus(const double* m) noexcept nogil:
    cdef double d, dt, u2
    _pt_inv(m, &d, &dt)
    u2 = dt * dt - 4.0 * d
    if u2 < 0.0:
        u2 = 0.0
    return sqrt(2.0 * d / (dt + sqrt(u2)))


cdef inline void _conjugate(const double* s, const double* m, double* out) noexcept nogil:
    cdef double sm[16]
    cdef int i, j, k
    cdef double acc
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc = acc + s[4 * i + k] * m[4 * k + j]
            sm[4 * i + j] = acc
    for i in range(4):
        for j in range(i, 4):
            acc = 0.0
            for k in range(4):
                acc = acc + sm[4 * i + k] * s[4 * j + k]
            out[4 * i + j] = acc
            out[4 * j + i] = acc


cdef inline void _propagate(const double* m, double g1, double g2, double k1,
                            double k2, double t, double* out) noexcept nogil:
    cdef double e1 = exp(-g1 * t)
    cdef double e2 = exp(-g2 * t)
    cdef double e12 = exp(-0.5 * (g1 + g2) * t)
    cdef int i, j, idx
    cdef double fix
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


cdef inline void _normalizer(double p, double q, double r, double* n) noexcept nogil:
    cdef double d = sqrt(p * r - q * q)
    cdef double tau = sqrt(p + r + 2.0 * d)
    cdef double f = 1.0 / (sqrt(d) * tau)
    n[0] = (r + d) * f
    n[1] = -q * f
    n[2] = -q * f
    n[3] = (p + d) * f


cdef void _reduce(const double* m, double* nf, double* red) noexcept nogil:
    cdef double n1[4]
    cdef double n2[4]
    cdef double t1[4]
    cdef double t2[4]
    cdef double h00, h01, h10, h11, p00, p01, p10, p11
    cdef double e, f, g, h, qq, rr, a1, a2, theta, phi, d1, d2, tmp
    cdef double cp, sp, ct, st
    cdef int i
    _normalizer(m[0], m[1], m[5], n1)
    _normalizer(m[10], m[11], m[15], n2)
    h00 = n1[0] * m[2] + n1[1] * m[6]
    h01 = n1[0] * m[3] + n1[1] * m[7]
    h10 = n1[2] * m[2] + n1[3] * m[6]
    h11 = n1[2] * m[3] + n1[3] * m[7]
    p00 = h00 * n2[0] + h01 * n2[1]
    p01 = h00 * n2[2] + h01 * n2[3]
    p10 = h10 * n2[0] + h11 * n2[1]
    p11 = h10 * n2[2] + h11 * n2[3]
    e = 0.5 * (p00 + p11)
    f = 0.5 * (p00 - p11)
    g = 0.5 * (p10 + p01)
    h = 0.5 * (p10 - p01)
    qq = hypot(e, h)
    rr = hypot(f, g)
    a1 = atan2(g, f)
    a2 = atan2(h, e)
    theta = 0.5 * (a2 - a1)
    phi = 0.5 * (a2 + a1)
    d1 = qq + rr
    d2 = qq - rr
    cp = cos(phi)
    sp = sin(phi)
    ct = cos(theta)
    st = sin(theta)
    t1[0] = cp * n1[0] + sp * n1[2]
    t1[1] = cp * n1[1] + sp * n1[3]
    t1[2] = -sp * n1[0] + cp * n1[2]
    t1[3] = -sp * n1[1] + cp * n1[3]
    t2[0] = ct * n2[0] - st * n2[2]
    t2[1] = ct * n2[1] - st * n2[3]
    t2[2] = st * n2[0] + ct * n2[2]
    t2[3] = st * n2[1] + ct * n2[3]
    if d2 < 0.0 and qq > 0.0:
        # gauge |c_minus| >= c_plus: -J on mode 1, J on mode 2
        tmp = t1[0]
        t1[0] = -t1[2]
        t1[2] = tmp
        tmp = t1[1]
        t1[1] = -t1[3]
        t1[3] = tmp
        tmp = t2[0]
        t2[0] = t2[2]
        t2[2] = -tmp
        tmp = t2[1]
        t2[1] = t2[3]
        t2[3] = -tmp
        tmp = d1
        d1 = -d2
        d2 = -tmp
    for i in range(16):
        red[i] = 0.0
    red[0] = t1[0]
    red[1] = t1[1]
    red[4] = t1[2]
    red[5] = t1[3]
    red[10] = t2[0]
    red[11] = t2[1]
    red[14] = t2[2]
    red[15] = t2[3]
    nf[0] = sqrt(m[0] * m[5] - m[1] * m[4])
    nf[1] = sqrt(m[10] * m[15] - m[11] * m[14])
    nf[2] = d1
    nf[3] = d2


cdef inline void _neg_coeffs(const double* nf, double* c) noexcept nogil:
    cdef double a = nf[0], b = nf[1], cp = nf[2], cm = nf[3]
    cdef double u2 = ((a * a - b * b) * (a * a - b * b)
                      + 4.0 * a * b * (cp * cp + cm * cm)
                      - 4.0 * cp * cm * (a * a + b * b))
    cdef double u = sqrt(u2) if u2 > 0.0 else 0.0
    c[0] = a * (b * b - a * a + u) + 2.0 * cp * (a * cm - b * cp)
    c[1] = a * (b * b - a * a + u) + 2.0 * cm * (a * cp - b * cm)
    c[2] = b * (a * a - b * b + u) + 2.0 * cp * (b * cm - a * cp)
    c[3] = b * (a * a - b * b + u) + 2.0 * cm * (b * cp - a * cm)


cdef inline void _sig_coeffs(const double* nf, double* c) noexcept nogil:
    cdef double a = nf[0], b = nf[1], cp = nf[2], cm = nf[3]
    c[0] = b * (a * b - cp * cp) - a
    c[1] = b * (a * b - cm * cm) - a
    c[2] = a * (a * b - cp * cp) - b
    c[3] = a * (a * b - cm * cm) - b


cdef inline double _clamped_z(double v, double w, double zmax, int* clamped) noexcept nogil:
    cdef double z
    if v > 0.0 and w > 0.0:
        z = pow(w / v, 0.25)
        if z > zmax:
            clamped[0] = 1
            return zmax
        if z < 1.0 / zmax:
            clamped[0] = 1
            return 1.0 / zmax
        return z
    clamped[0] = 1
    if v * zmax * zmax + w / (zmax * zmax) <= v / (zmax * zmax) + w * zmax * zmax:
        return zmax
    return 1.0 / zmax


cdef int _control(const double* m, int law, int scope, double zmax, double* s) noexcept nogil:
    cdef double nf[4]
    cdef double red[16]
    cdef double c[4]
    cdef double z1, z2
    cdef int clamped = 0
    cdef int status = _OK
    cdef int j
    if _nu_minus(m) >= 1.0:
        _identity(s)
        return _SEPARABLE
    _reduce(m, nf, red)
    if law == 1:
        _neg_coeffs(nf, c)
        if c[0] <= 0.0 or c[1] <= 0.0 or c[2] <= 0.0 or c[3] <= 0.0:
            _identity(s)
            return _BAD
        z1 = pow(c[1] / c[0], 0.25)
        z2 = pow(c[3] / c[2], 0.25)
    else:
        _sig_coeffs(nf, c)
        z1 = _clamped_z(c[0], c[1], zmax, &clamped)
        z2 = _clamped_z(c[2], c[3], zmax, &clamped)
        if clamped:
            status = _CLAMPED
    for j in range(16):
        s[j] = 0.0
    if scope != 2:
        for j in range(2):
            s[j] = z1 * red[j]
            s[4 + j] = red[4 + j] / z1
    else:
        s[0] = 1.0
        s[5] = 1.0
    if scope != 1:
        for j in range(2, 4):
            s[8 + j] = z2 * red[8 + j]
            s[12 + j] = red[12 + j] / z2
    else:
        s[10] = 1.0
        s[15] = 1.0
    return status


# --------------------------------------------------------------------------
# public surface


def nu_tilde_minus(s):
    """Smallest partially transposed symplectic eigenvalue (closed form)."""
    cdef double m[16]
    _load(s, m)
    return _nu_minus(m)


def pt_invariants(s):
    """Return ``(det_sigma, delta_tilde)``."""
    cdef double m[16]
    cdef double d, dt
    _load(s, m)
    _pt_inv(m, &d, &dt)
    return d, dt


def propagate(s, double g1, double g2, double k1, double k2, double t):
    """Exact thermal-loss evolution; ``k_i`` is the ratio chi_i / gamma_i."""
    cdef double m[16]
    cdef double out[16]
    _load(s, m)
    _propagate(m, g1, g2, k1, k2, t, out)
    return _store(out)


def simon_reduce(s):
    cdef double m[16]
    cdef double nf[4]
    cdef double red[16]
    _load(s, m)
    _reduce(m, nf, red)
    return nf[0], nf[1], nf[2], nf[3], _store(red)


def control_matrix(s, int law, int scope, double zmax):
    cdef double m[16]
    cdef double c[16]
    _load(s, m)
    status = _control(m, law, scope, zmax, c)
    return _store(c), status


def run_trajectory(s0, double g1, double g2, double k1, double k2, double dt,
                   flags, int law, int scope, double zmax):
    """Alternate scheduled controls with free evolution over a uniform grid."""
    cdef const unsigned char[::1] fl = np.ascontiguousarray(flags, dtype=np.uint8)
    cdef Py_ssize_t n = fl.shape[0]
    states_arr = np.empty((n, 4, 4))
    controls_arr = np.empty((n, 4, 4))
    status_arr = np.zeros(n, dtype=np.int64)
    cdef double[:, :, ::1] states = states_arr
    cdef double[:, :, ::1] controls = controls_arr
    cdef long long[::1] status = status_arr
    cdef double m[16]
    cdef double nxt[16]
    cdef double c[16]
    cdef Py_ssize_t k = 0, i
    cdef int st
    _load(s0, m)
    with nogil:
        for k in range(n):
            if fl[k]:
                st = _control(m, law, scope, zmax, c)
                status[k] = st
                if st == _BAD:
                    break
                if st != _SEPARABLE:
                    _conjugate(c, m, nxt)
                    for i in range(16):
                        m[i] = nxt[i]
            else:
                _identity(c)
            for i in range(16):
                states[k, i // 4, i % 4] = m[i]
                controls[k, i // 4, i % 4] = c[i]
            if k + 1 < n:
                _propagate(m, g1, g2, k1, k2, dt, nxt)
                for i in range(16):
                    m[i] = nxt[i]
    if n > 0 and status[k] == _BAD:
        states_arr[k:] = np.nan
        controls_arr[k:] = np.nan
    return states_arr, controls_arr, status_arr
