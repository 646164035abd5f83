"""Reference implementations that share no code with the package."""
from fractions import Fraction

import mpmath


def j0_series_mp(x, dps=50):
    """J0 by its power series in mpmath arithmetic at ``dps`` digits."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        q = -x * x / 4
        term = mpmath.mpf(1)
        total = mpmath.mpf(1)
        k = 0
        while True:
            k += 1
            term = term * q / (k * k)
            total += term
            if k * k > abs(q) and abs(term) < mpmath.mpf(10) ** (-dps + 5):
                return float(total)


def laguerre_exact(m, x):
    """L_m(x) = F(-m, 1, x) by the three-term recurrence in exact rationals."""
    x = Fraction(x)
    prev, cur = Fraction(1), 1 - x
    if m == 0:
        return prev
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur
