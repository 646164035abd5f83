"""Pure-Python (numpy) implementation of the numerical kernels.

This module is the reference: ``_ckernels.pyx`` performs the same operations
in the same order, so both backends agree to the last bit or two.  All
double-double arithmetic uses error-free transformations (Dekker splitting
here, ``fma`` in the compiled core; both produce identical exact products).
"""
import numpy as np

# Power series in double-double up to this |x|; asymptotic expansion beyond.
J0_SERIES_LIMIT = 25.0
J0_SERIES_MAX_TERMS = 120
J0_SERIES_TAIL = 1e-22
J0_ASYMPTOTIC_TERMS = 26

_SPLIT = 134217729.0  # 2**27 + 1
_TWO_OVER_PI = 0.6366197723675814
_INV_SQRT2 = 0.7071067811865476


def _asymptotic_coefficients(n_terms):
    b = [1.0]
    for k in range(1, n_terms):
        b.append(b[-1] * (2 * k - 1) ** 2 / (8.0 * k))
    p = [(-1.0) ** j * b[2 * j] for j in range((n_terms + 1) // 2)]
    q = [-((-1.0) ** j) * b[2 * j + 1] for j in range(n_terms // 2)]
    return np.array(p), np.array(q)


J0_P_COEFFS, J0_Q_COEFFS = _asymptotic_coefficients(J0_ASYMPTOTIC_TERMS)


# -- error-free transformations ------------------------------------------------

def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _fast_two_sum(p, e)


def _dd_mul_d(ah, al, b):
    p, e = _two_prod(ah, b)
    e = e + al * b
    return _fast_two_sum(p, e)


def _dd_div_d(ah, al, d):
    q1 = ah / d
    p, e = _two_prod(q1, d)
    r = ((ah - p) - e) + al
    return _fast_two_sum(q1, r / d)


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e = e + (al + bl)
    return _fast_two_sum(s, e)


# -- Bessel J0 -------------------------------------------------------------------

def _j0_series(ax):
    x2h, x2l = _two_prod(ax, ax)
    qh, ql = -0.25 * x2h, -0.25 * x2l
    qabs = np.abs(qh)
    th, tl = np.ones_like(ax), np.zeros_like(ax)
    sh, sl = np.ones_like(ax), np.zeros_like(ax)
    active = np.ones(ax.shape, dtype=bool)
    for k in range(1, J0_SERIES_MAX_TERMS + 1):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        a_th, a_tl = _dd_mul(th[idx], tl[idx], qh[idx], ql[idx])
        a_th, a_tl = _dd_div_d(a_th, a_tl, float(k * k))
        a_sh, a_sl = _dd_add(sh[idx], sl[idx], a_th, a_tl)
        th[idx], tl[idx], sh[idx], sl[idx] = a_th, a_tl, a_sh, a_sl
        done = (k * k > qabs[idx]) & (np.abs(a_th) < J0_SERIES_TAIL)
        active[idx[done]] = False
    return sh + sl


def _horner(coeffs, y):
    acc = np.full_like(y, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * y + c
    return acc


def _j0_asymptotic(ax):
    y = 1.0 / ax
    y2 = y * y
    p = _horner(J0_P_COEFFS, y2)
    q = y * _horner(J0_Q_COEFFS, y2)
    amp = np.sqrt(_TWO_OVER_PI / ax)
    c, s = np.cos(ax), np.sin(ax)
    return amp * _INV_SQRT2 * ((p + q) * c + (p - q) * s)


def j0(x):
    """Vectorized J0 over a 1-d float64 array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= J0_SERIES_LIMIT
    if small.any():
        out[small] = _j0_series(ax[small])
    if (~small).any():
        out[~small] = _j0_asymptotic(ax[~small])
    return out


# -- Kummer polynomial (double-double Horner) ----------------------------------

def poly_dd(coef_hi, coef_lo, x):
    """Evaluate sum_k c_k x^k with coefficients given as double-double pairs."""
    coef_hi = np.asarray(coef_hi, dtype=np.float64)
    coef_lo = np.asarray(coef_lo, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    m = coef_hi.shape[0] - 1
    sh = np.full_like(x, coef_hi[m])
    sl = np.full_like(x, coef_lo[m])
    for k in range(m - 1, -1, -1):
        sh, sl = _dd_mul_d(sh, sl, x)
        sh, sl = _dd_add(sh, sl, coef_hi[k], coef_lo[k])
    return sh + sl


# -- shooting integrator for x psi'' + psi' + (lam - x) psi = 0 ----------------

SERIES_MAX_TERMS = 400


def frobenius_start(lams, x0):
    """Regular series solution (psi(0) = 1) and its derivative at x0."""
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    psi = np.ones_like(lams)
    dpsi = np.zeros_like(lams)
    a_prev = np.zeros_like(lams)
    a_cur = np.ones_like(lams)
    xn = 1.0  # x0**n
    for n in range(SERIES_MAX_TERMS):
        a_next = (a_prev - lams * a_cur) / float((n + 1) * (n + 1))
        dpsi = dpsi + (n + 1) * a_next * xn
        xn = xn * x0
        term = a_next * xn
        psi = psi + term
        a_prev, a_cur = a_cur, a_next
        if n > 4 and np.all(np.abs(term) <= 1e-18 * np.abs(psi)):
            break
    return psi, dpsi


def shoot(lams, x0, x1, n_steps):
    """RK4 from x0 to x1; returns psi(x1) for each eigen-parameter lane."""
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    y0, y1 = frobenius_start(lams, x0)
    h = (x1 - x0) / n_steps
    half = 0.5 * h
    for i in range(n_steps):
        x = x0 + i * h
        xm = x + half
        xe = x + h
        k1a = y1
        k1b = -y1 / x - (lams / x - 1.0) * y0
        a = y0 + half * k1a
        b = y1 + half * k1b
        k2a = b
        k2b = -b / xm - (lams / xm - 1.0) * a
        a = y0 + half * k2a
        b = y1 + half * k2b
        k3a = b
        k3b = -b / xm - (lams / xm - 1.0) * a
        a = y0 + h * k3a
        b = y1 + h * k3b
        k4a = b
        k4b = -b / xe - (lams / xe - 1.0) * a
        y0 = y0 + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        y1 = y1 + (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
    return y0
