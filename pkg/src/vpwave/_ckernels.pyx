# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels; operation-for-operation mirror of _pykernels."""
import numpy as np

from libc.math cimport fabs, sqrt, cos, sin

from vpwave._pykernels import (
    J0_SERIES_LIMIT as _LIMIT,
    J0_SERIES_MAX_TERMS as _MAX_TERMS,
    J0_SERIES_TAIL as _TAIL,
    J0_P_COEFFS as _P,
    J0_Q_COEFFS as _Q,
    SERIES_MAX_TERMS as _FROB_MAX,
)

cdef double SERIES_LIMIT = _LIMIT
cdef int SERIES_MAX_TERMS = _MAX_TERMS
cdef double SERIES_TAIL = _TAIL
cdef int FROB_MAX = _FROB_MAX
cdef double TWO_OVER_PI = 0.6366197723675814
cdef double INV_SQRT2 = 0.7071067811865476

cdef double[::1] P_COEFFS = np.ascontiguousarray(_P, dtype=np.float64)
cdef double[::1] Q_COEFFS = np.ascontiguousarray(_Q, dtype=np.float64)

ctypedef struct dd:
    double hi
    double lo


cdef inline dd fast_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r


cdef inline dd two_sum(double a, double b) noexcept nogil:
    cdef double s = a + b
    cdef double bb = s - a
    cdef dd r
    r.hi = s
    r.lo = (a - (s - bb)) + (b - bb)
    return r


cdef inline dd split(double a) noexcept nogil:
    # Dekker split; libm fma can fall back to slow software emulation
    cdef double t = 134217729.0 * a
    cdef dd r
    r.hi = t - (t - a)
    r.lo = a - r.hi
    return r


cdef inline dd two_prod(double a, double b) noexcept nogil:
    cdef dd sa = split(a)
    cdef dd sb = split(b)
    cdef dd r
    r.hi = a * b
    r.lo = ((sa.hi * sb.hi - r.hi) + sa.hi * sb.lo + sa.lo * sb.hi) + sa.lo * sb.lo
    return r


cdef inline dd dd_mul(dd a, dd b) noexcept nogil:
    cdef dd p = two_prod(a.hi, b.hi)
    cdef double e = p.lo + (a.hi * b.lo + a.lo * b.hi)
    return fast_two_sum(p.hi, e)


cdef inline dd dd_mul_d(dd a, double b) noexcept nogil:
    cdef dd p = two_prod(a.hi, b)
    cdef double e = p.lo + a.lo * b
    return fast_two_sum(p.hi, e)


cdef inline dd dd_div_d(dd a, double d) noexcept nogil:
    cdef double q1 = a.hi / d
    cdef dd p = two_prod(q1, d)
    cdef double r = ((a.hi - p.hi) - p.lo) + a.lo
    return fast_two_sum(q1, r / d)


cdef inline dd dd_add(dd a, dd b) noexcept nogil:
    cdef dd s = two_sum(a.hi, b.hi)
    cdef double e = s.lo + (a.lo + b.lo)
    return fast_two_sum(s.hi, e)


cdef double j0_series(double ax) noexcept nogil:
    cdef dd x2 = two_prod(ax, ax)
    cdef dd q
    q.hi = -0.25 * x2.hi
    q.lo = -0.25 * x2.lo
    cdef double qabs = fabs(q.hi)
    cdef dd t, s
    t.hi = 1.0
    t.lo = 0.0
    s.hi = 1.0
    s.lo = 0.0
    cdef int k
    for k in range(1, SERIES_MAX_TERMS + 1):
        t = dd_mul(t, q)
        t = dd_div_d(t, <double>(k * k))
        s = dd_add(s, t)
        if k * k > qabs and fabs(t.hi) < SERIES_TAIL:
            break
    return s.hi + s.lo


cdef double horner(double[::1] coeffs, double y) noexcept nogil:
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef double acc = coeffs[n - 1]
    cdef Py_ssize_t i
    for i in range(n - 2, -1, -1):
        acc = acc * y + coeffs[i]
    return acc


cdef double j0_asymptotic(double ax) noexcept nogil:
    cdef double y = 1.0 / ax
    cdef double y2 = y * y
    cdef double p = horner(P_COEFFS, y2)
    cdef double q = y * horner(Q_COEFFS, y2)
    cdef double amp = sqrt(TWO_OVER_PI / ax)
    return amp * INV_SQRT2 * ((p + q) * cos(ax) + (p - q) * sin(ax))


cpdef double j0_scalar(double x) noexcept nogil:
    cdef double ax = fabs(x)
    if ax <= SERIES_LIMIT:
        return j0_series(ax)
    return j0_asymptotic(ax)


def j0(x):
    """Vectorized J0 over a 1-d float64 array."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = j0_scalar(xv[i])
    return out


def poly_dd(coef_hi, coef_lo, x):
    """Evaluate sum_k c_k x^k with coefficients given as double-double pairs."""
    cdef const double[::1] ch = np.ascontiguousarray(coef_hi, dtype=np.float64)
    cdef const double[::1] cl = np.ascontiguousarray(coef_lo, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t m = ch.shape[0] - 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k
    cdef dd s, c
    with nogil:
        for i in range(n):
            s.hi = ch[m]
            s.lo = cl[m]
            for k in range(m - 1, -1, -1):
                s = dd_mul_d(s, xv[i])
                c.hi = ch[k]
                c.lo = cl[k]
                s = dd_add(s, c)
            ov[i] = s.hi + s.lo
    return out


def frobenius_start(lams, double x0):
    """Regular series solution (psi(0) = 1) and its derivative at x0."""
    cdef const double[::1] lv = np.ascontiguousarray(lams, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0]
    psi = np.empty(n, dtype=np.float64)
    dpsi = np.empty(n, dtype=np.float64)
    cdef double[::1] pv = psi
    cdef double[::1] dv = dpsi
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _frobenius(lv[i], x0, &pv[i], &dv[i])
    return psi, dpsi


cdef void _frobenius(double lam, double x0, double* psi_out, double* dpsi_out) noexcept nogil:
    cdef double psi = 1.0, dpsi = 0.0
    cdef double a_prev = 0.0, a_cur = 1.0, a_next, term
    cdef double xn = 1.0
    cdef int n
    for n in range(FROB_MAX):
        a_next = (a_prev - lam * a_cur) / <double>((n + 1) * (n + 1))
        dpsi = dpsi + (n + 1) * a_next * xn
        xn = xn * x0
        term = a_next * xn
        psi = psi + term
        a_prev = a_cur
        a_cur = a_next
        if n > 4 and fabs(term) <= 1e-18 * fabs(psi):
            break
    psi_out[0] = psi
    dpsi_out[0] = dpsi


def shoot(lams, double x0, double x1, int n_steps):
    """RK4 from x0 to x1; returns psi(x1) for each eigen-parameter lane."""
    cdef const double[::1] lv = np.ascontiguousarray(lams, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double h = (x1 - x0) / n_steps
    cdef double half = 0.5 * h
    cdef double lam, y0, y1, x, xm, xe, a, b
    cdef double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b
    cdef Py_ssize_t j
    cdef int i
    with nogil:
        for j in range(n):
            lam = lv[j]
            _frobenius(lam, x0, &y0, &y1)
            for i in range(n_steps):
                x = x0 + i * h
                xm = x + half
                xe = x + h
                k1a = y1
                k1b = -y1 / x - (lam / x - 1.0) * y0
                a = y0 + half * k1a
                b = y1 + half * k1b
                k2a = b
                k2b = -b / xm - (lam / xm - 1.0) * a
                a = y0 + half * k2a
                b = y1 + half * k2b
                k3a = b
                k3b = -b / xm - (lam / xm - 1.0) * a
                a = y0 + h * k3a
                b = y1 + h * k3b
                k4a = b
                k4b = -b / xe - (lam / xe - 1.0) * a
                y0 = y0 + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
                y1 = y1 + (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            ov[j] = y0
    return out
