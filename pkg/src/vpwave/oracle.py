"""Independent numerical checks of the closed-form eigenfunctions.

Two routes, neither of which touches the fitting code:

* residuals: substitute the closed form into its ODE and difference
  numerically on a grid of shifted prices p' > 0;
* shooting: integrate the Kummer-type ODE outward from its regular series
  start and locate the decay rates at which the solution stops blowing up.

Both ODEs are evaluated in the p'-multiplied form

    Bessel:  p' psi'' + psi' + omega^2 p' psi = 0
    Kummer:  p' psi'' + psi' + (E - A p') psi = 0

which is equivalent on p' > 0 and keeps the 1/p' coefficient from
amplifying difference errors near the singular point.
"""
from dataclasses import dataclass

import numpy as np

from vpwave import kernels
from vpwave.errors import BracketMiss, GridTouchesSingularity, InvalidParameters
from vpwave.models import kummer_sqrt_eigenvalue, kummer_wave
from vpwave.specfun import bessel_j0

SCHEMA_VERSION = 1
STANDARD_GRID = (1e-2, 20.0, 2000)
DEFAULT_STEP = 1e-4
MAX_SHOOTING_ORDER = 10

# shooting setup in the scaled variable x = sqrt(A) p'
SHOOT_X0 = 0.5
SHOOT_TAIL = 25.0
SHOOT_DX = 0.01
SCAN_STEP = 0.25
REFINE_LANES = 32
REFINE_TOL = 1e-11


def standard_grid(lo=STANDARD_GRID[0], hi=STANDARD_GRID[1], n=STANDARD_GRID[2]):
    """Geometrically spaced shifted prices."""
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True, eq=False)
class ResidualReport:
    grid: np.ndarray
    residuals: np.ndarray
    max_abs_residual: float
    boundary_decay: tuple
    step: float

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "grid": self.grid.tolist(),
            "residuals": self.residuals.tolist(),
            "max_abs_residual": self.max_abs_residual,
            "boundary_decay": list(self.boundary_decay),
            "step": self.step,
        }


def _derivatives(psi, grid, h):
    """psi' and psi'' from three-point stencils at p - h, p, p + h.

    The stencil offsets are the ones actually representable in floating
    point, so a rounded p + h does not masquerade as truncation error.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if not h > 0:
        raise InvalidParameters("step must be positive")
    up, down = grid + h, grid - h
    if np.any(down <= 0):
        raise GridTouchesSingularity(f"stencil reaches p' <= 0 at p' = {grid[down <= 0][0]!r} with h = {h}")
    hp, hm = up - grid, grid - down
    f0, fp, fm = psi(grid), psi(up), psi(down)
    d1 = (hm**2 * fp - hp**2 * fm + (hp**2 - hm**2) * f0) / (hp * hm * (hp + hm))
    d2 = 2.0 * (hm * fp + hp * fm - (hp + hm) * f0) / (hp * hm * (hp + hm))
    return f0, d1, d2


def _interior(grid):
    """Residuals are reported on the interior; the two ends give boundary values."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise InvalidParameters("grid must be strictly increasing with at least 3 points")
    return grid[1:-1]


def bessel_ode_residual(omega, grid=None, h=DEFAULT_STEP, psi=None):
    """Residual of p' psi'' + psi' + omega^2 p' psi with psi = J0(omega p') by default.

    ``psi`` may be any callable of p' (e.g. J0 at a different frequency, or
    zero) to probe the identity.
    """
    if not omega > 0:
        raise InvalidParameters("omega must be positive")
    grid = standard_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    pts = _interior(grid)
    if psi is None:
        # difference in x = omega p', where the stencil points are exactly the
        # arguments J0 sees; the p'-form residual is omega (x J0'' + J0' + x J0)
        x = omega * pts
        f0, d1, d2 = _derivatives(lambda z: np.asarray(bessel_j0(z)), x, omega * h)
        res = omega * (x * d2 + d1 + x * f0)
        ends = np.asarray(bessel_j0(omega * grid[[0, -1]]), dtype=np.float64)
    else:
        f0, d1, d2 = _derivatives(psi, pts, h)
        res = pts * d2 + d1 + omega**2 * pts * f0
        ends = np.asarray(psi(grid[[0, -1]]), dtype=np.float64)
    return ResidualReport(pts, res, float(np.max(np.abs(res))), (float(ends[0]), float(ends[1])), float(h))


def kummer_ode_residual(m, energy, grid=None, h=DEFAULT_STEP, sqrt_a=None):
    """Residual of p' psi'' + psi' + (E - A p') psi for the order-m eigenfunction.

    The decay rate defaults to sqrt(A) = E / (1 + 2m); pass ``sqrt_a`` to test
    a different one.
    """
    if not energy > 0:
        raise InvalidParameters("E must be positive on the p' >= 0 branch")
    if int(m) != m or not 0 <= m <= 20:
        raise InvalidParameters("m must be an integer in [0, 20]")
    m = int(m)
    s = kummer_sqrt_eigenvalue(m, energy) if sqrt_a is None else float(sqrt_a)
    grid = standard_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    psi = lambda p: np.asarray(kummer_wave(m, s, p))  # noqa: E731
    pts = _interior(grid)
    f0, d1, d2 = _derivatives(psi, pts, h)
    res = pts * d2 + d1 + (energy - s * s * pts) * f0
    ends = np.asarray(psi(grid[[0, -1]]), dtype=np.float64)
    return ResidualReport(pts, res, float(np.max(np.abs(res))), (float(ends[0]), float(ends[1])), float(h))


def _tail_value(lams, x1):
    n_steps = int(round((x1 - SHOOT_X0) / SHOOT_DX))
    return kernels.shoot(np.asarray(lams, dtype=np.float64), SHOOT_X0, x1, n_steps)


def eigenvalue_search(m, energy):
    """Restoring-force eigenvalue A_m located by shooting.

    With x = sqrt(A) p' and lam = E / sqrt(A) the ODE becomes
    x psi'' + psi' + (lam - x) psi = 0.  The regular solution is integrated
    to a far point and lam is scanned for sign changes of psi there; the
    (m+1)-th sign change brackets the order-m eigenvalue, which is refined by
    repeated subdivision.  Returns A = (E / lam)^2.
    """
    if int(m) != m or not 0 <= m <= MAX_SHOOTING_ORDER:
        raise InvalidParameters(f"m must be an integer in [0, {MAX_SHOOTING_ORDER}]")
    if not energy > 0:
        raise InvalidParameters("E must be positive")
    m = int(m)
    x1 = 2.0 * m + SHOOT_TAIL
    lam_max = 2.0 * m + 3.0
    lams = np.arange(SCAN_STEP, lam_max + SCAN_STEP / 2, SCAN_STEP)
    vals = _tail_value(lams, x1)
    flips = np.nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))[0]
    if flips.size < m + 1:
        raise BracketMiss(f"found {flips.size} sign changes below lam = {lam_max}, need {m + 1}")
    lo, hi = lams[flips[m]], lams[flips[m] + 1]
    v_lo = vals[flips[m]]
    while hi - lo > REFINE_TOL * hi:
        probe = np.linspace(lo, hi, REFINE_LANES + 2)[1:-1]
        pv = _tail_value(probe, x1)
        pts = np.concatenate(([lo], probe, [hi]))
        signs = np.concatenate(([np.signbit(v_lo)], np.signbit(pv), [not np.signbit(v_lo)]))
        k = int(np.nonzero(signs[:-1] != signs[1:])[0][0])
        lo, hi = pts[k], pts[k + 1]
        v_lo = v_lo if k == 0 else pv[k - 1]
    lam = 0.5 * (lo + hi)
    return float((energy / lam) ** 2)
