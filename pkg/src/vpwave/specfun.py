"""Special functions: Bessel J0 and the Kummer function F(-m, 1, x)."""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from vpwave import kernels
from vpwave.errors import InvalidParameters, NonFinite, OrderTooLarge

MAX_KUMMER_ORDER = 64
J0_FIRST_ZERO = 2.404825557695773


def _as_array(x):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite argument: {x!r}")
    return arr


def bessel_j0(x):
    """Zero-order Bessel function of the first kind.

    Accepts a scalar or an array.  Absolute error is at the level of one or
    two ulps for |x| <= 1e4 (double-double power series up to |x| = 25,
    Hankel asymptotic expansion beyond).
    """
    arr = _as_array(x)
    out = kernels.j0(arr.ravel()).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def pochhammer(a, k):
    """Rising factorial a (a+1) ... (a+k-1); 1 for k = 0.

    Exact when ``a`` is an int or Fraction.
    """
    if k < 0 or int(k) != k:
        raise InvalidParameters("k must be a non-negative integer")
    out = 1 if isinstance(a, (int, Fraction)) else 1.0
    for i in range(int(k)):
        out *= a + i
    return out


@dataclass(frozen=True)
class KummerPolynomial:
    """F(-m, 1, x) as the exact degree-m polynomial sum_k c_k x^k."""

    order: int
    coefficients: tuple

    @classmethod
    def of_order(cls, m):
        return _kummer_polynomial(_check_order(m))

    @property
    def split_coefficients(self):
        """Coefficients as (hi, lo) float arrays with hi + lo = c_k to ~1e-32."""
        return _split_coefficients(self.order)

    def __call__(self, x):
        hi, lo = self.split_coefficients
        arr = _as_array(x)
        out = kernels.poly_dd(hi, lo, arr.ravel()).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out


def _check_order(m):
    if isinstance(m, bool) or int(m) != m or m < 0:
        raise InvalidParameters(f"Kummer order must be a non-negative integer, got {m!r}")
    m = int(m)
    if m > MAX_KUMMER_ORDER:
        raise OrderTooLarge(f"order {m} exceeds the supported maximum {MAX_KUMMER_ORDER}")
    return m


@lru_cache(maxsize=None)
def _kummer_polynomial(m):
    coeffs = tuple(
        Fraction(pochhammer(Fraction(-m), k)) / (math.factorial(k) * pochhammer(1, k))
        for k in range(m + 1)
    )
    return KummerPolynomial(order=m, coefficients=coeffs)


@lru_cache(maxsize=None)
def _split_coefficients(m):
    coeffs = _kummer_polynomial(m).coefficients
    hi = np.array([float(c) for c in coeffs])
    lo = np.array([float(c - Fraction(h)) for c, h in zip(coeffs, hi)])
    hi.setflags(write=False)
    lo.setflags(write=False)
    return hi, lo


def kummer(m, x):
    """Confluent hypergeometric F(-m, 1, x), evaluated as a polynomial.

    Horner's rule runs in double-double arithmetic on exactly rounded
    coefficients, so the alternating series does not lose digits to
    cancellation for moderate x.
    """
    return KummerPolynomial.of_order(m)(x)
