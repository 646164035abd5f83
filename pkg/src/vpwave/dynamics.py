"""Transaction-dynamics quantities derived from a volume-at-price distribution.

Every per-level quantity carries its dimension as exponents of
(share, currency, second).  Identity checks use the natural-unit convention
V / B^2 = 1, under which a fitted omega^2 is read directly in shares/s^2.
"""
import csv
from dataclasses import dataclass, fields

import numpy as np

from vpwave.errors import DimensionMismatch, InvalidParameters, NotBesselFit
from vpwave.models import Family


@dataclass(frozen=True)
class Dim:
    share: int = 0
    currency: int = 0
    time: int = 0

    def __mul__(self, other):
        return Dim(self.share + other.share, self.currency + other.currency, self.time + other.time)

    def __truediv__(self, other):
        return Dim(self.share - other.share, self.currency - other.currency, self.time - other.time)

    def __pow__(self, n):
        return Dim(self.share * n, self.currency * n, self.time * n)

    def __str__(self):
        parts = []
        for name, exp in (("share", self.share), ("currency", self.currency), ("s", self.time)):
            if exp == 1:
                parts.append(name)
            elif exp:
                parts.append(f"{name}^{exp}")
        return "*".join(parts) or "1"


DIMENSIONLESS = Dim()
SHARE = Dim(share=1)
CURRENCY = Dim(currency=1)
SECOND = Dim(time=1)


@dataclass(frozen=True, eq=False)
class Quantity:
    """A value (scalar or array) tagged with its dimension."""

    value: np.ndarray
    dim: Dim = DIMENSIONLESS

    # keep numpy from swallowing ``array * quantity``
    __array_ufunc__ = None

    def __post_init__(self):
        object.__setattr__(self, "value", np.asarray(self.value, dtype=np.float64))

    def _check(self, other, op):
        if not isinstance(other, Quantity):
            other = Quantity(other)
        if other.dim != self.dim:
            raise DimensionMismatch(f"cannot {op} [{self.dim}] and [{other.dim}]")
        return other

    def __add__(self, other):
        other = self._check(other, "add")
        return Quantity(self.value + other.value, self.dim)

    def __sub__(self, other):
        other = self._check(other, "subtract")
        return Quantity(self.value - other.value, self.dim)

    def __neg__(self):
        return Quantity(-self.value, self.dim)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value * other.value, self.dim * other.dim)
        return Quantity(self.value * other, self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value / other.value, self.dim / other.dim)
        return Quantity(self.value / other, self.dim)

    def __pow__(self, n):
        return Quantity(self.value**n, self.dim**n)

    def retag(self, dim):
        """Reinterpret under the natural-unit convention (explicit, never implicit)."""
        return Quantity(self.value, dim)


def _times(dist, times):
    if times is None:
        return Quantity(np.full(dist.n_levels, dist.session_span), SECOND)
    t = np.asarray(times, dtype=np.float64)
    if t.shape != (dist.n_levels,) or np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise InvalidParameters("times must be one positive value per level")
    return Quantity(t, SECOND)


@dataclass(frozen=True, eq=False)
class DynamicsProfile:
    """Per-level dynamics for one distribution.

    ``restoring_a`` is the linear-potential slope A and ``p0`` the equilibrium
    price; ``omega_sq_check`` is (v/V) v_tt per level.
    """

    prices: Quantity
    volume_liquidity: Quantity
    volume_acceleration: Quantity
    transaction_energy: Quantity
    amount_liquidity: Quantity
    potential: Quantity
    restoring_force: Quantity
    transaction_force: Quantity
    omega_sq_check: Quantity
    restoring_a: float
    p0: float
    total_volume: float

    @classmethod
    def from_parameters(cls, dist, restoring_a, p0, times=None):
        """Profile for a given potential slope A and center p0."""
        t = _times(dist, times)
        p = Quantity(dist.prices, CURRENCY)
        v = Quantity(dist.volumes, SHARE)
        total = Quantity(dist.total_volume, SHARE)
        share_frac = v / total
        v_t = v / t
        v_tt = v / t**2
        # W = A (p - p0); A is a rate^2 so W is currency/s^2
        w = Quantity(restoring_a, SECOND**-2) * (p - Quantity(p0, CURRENCY))
        return cls(
            prices=p,
            volume_liquidity=v_t,
            volume_acceleration=v_tt,
            transaction_energy=p * v_tt,
            amount_liquidity=p * v_t,
            potential=w,
            restoring_force=-(1.0 - share_frac.value) * v_tt,
            transaction_force=v_tt,
            omega_sq_check=share_frac * v_tt,
            restoring_a=float(restoring_a),
            p0=float(p0),
            total_volume=float(dist.total_volume),
        )

    @property
    def n_levels(self):
        return int(self.prices.value.size)

    _CSV_COLUMNS = (
        ("price", "prices"),
        ("v_t", "volume_liquidity"),
        ("v_tt", "volume_acceleration"),
        ("E", "transaction_energy"),
        ("m_t", "amount_liquidity"),
        ("W", "potential"),
        ("F_R", "restoring_force"),
        ("F_T", "transaction_force"),
        ("omega_sq_check", "omega_sq_check"),
    )

    def write_csv(self, stream):
        """One row per level, preceded by a header row and a units row."""
        writer = csv.writer(stream, lineterminator="\n")
        cols = [getattr(self, attr) for _, attr in self._CSV_COLUMNS]
        writer.writerow([name for name, _ in self._CSV_COLUMNS])
        writer.writerow([str(q.dim) for q in cols])
        for i in range(self.n_levels):
            writer.writerow([repr(float(q.value[i])) for q in cols])

    def to_json_dict(self):
        out = {"restoring_a": self.restoring_a, "p0": self.p0, "total_volume": self.total_volume, "units": {}}
        for f in fields(self):
            q = getattr(self, f.name)
            if isinstance(q, Quantity):
                out[f.name] = q.value.tolist()
                out["units"][f.name] = str(q.dim)
        return out


def compute_profile(dist, fitted, times=None):
    """Dynamics for a single-Bessel fit; A = mean over levels of v_tt - omega^2.

    ``fitted`` is a FitResult or ModelSpec.  ``times`` optionally gives a
    per-level dwell time; by default every level uses the session span.
    """
    spec = getattr(fitted, "spec", fitted)
    if getattr(spec, "family", None) is not Family.BESSEL:
        raise NotBesselFit(f"need a single-Bessel fit, got {getattr(spec, 'family', type(spec).__name__)}")
    check = check_eigenvalue_identity(dist, spec.params["omega"], times)
    return DynamicsProfile.from_parameters(dist, check.a_estimate, spec.params["p0"], times)


def check_energy_hypothesis(profile, dist):
    """Per-level residual r = -E + (v_t^2 / V) p + W of the energy balance."""
    if profile.n_levels != dist.n_levels or not np.array_equal(profile.prices.value, dist.prices):
        raise InvalidParameters("profile and distribution are not on the same grid")
    total = Quantity(dist.total_volume, SHARE)
    kinetic = profile.volume_liquidity**2 / total * profile.prices
    # share/s^2 * currency reads as currency/s^2 once shares are natural units
    kinetic = kinetic.retag(CURRENCY / SECOND**2)
    energy = profile.transaction_energy.retag(CURRENCY / SECOND**2)
    return (-energy + kinetic + profile.potential).value


@dataclass(frozen=True)
class EigenvalueCheck:
    a_estimate: float
    max_deviation: float
    dispersion: float
    omega_sq: float
    omega_sq_levels: tuple
    a_levels: tuple

    def to_json_dict(self):
        return {
            "a_estimate": self.a_estimate,
            "max_deviation": self.max_deviation,
            "dispersion": self.dispersion,
            "omega_sq": self.omega_sq,
            "omega_sq_levels": list(self.omega_sq_levels),
            "a_levels": list(self.a_levels),
            "units": "natural (V/B^2 = 1): omega^2 read as shares/s^2",
        }


def check_eigenvalue_identity(dist, omega, times=None):
    """Coherence diagnostic: is (v/V) v_tt constant and equal to omega^2?

    Returns the implied A (mean of v_tt - omega^2), the largest absolute gap
    between (v/V) v_tt and omega^2, and the relative dispersion
    (max - min) / mean of (v/V) v_tt.
    """
    t = _times(dist, times)
    v_tt = Quantity(dist.volumes, SHARE) / t**2
    q = (Quantity(dist.volumes, SHARE) / Quantity(dist.total_volume, SHARE)) * v_tt
    omega_sq = Quantity(float(omega) ** 2, CURRENCY**-2).retag(q.dim)
    a_levels = v_tt - omega_sq
    qv = q.value
    mean = float(qv.mean())
    dispersion = 0.0 if mean == 0 else float((qv.max() - qv.min()) / mean)
    return EigenvalueCheck(
        a_estimate=float(a_levels.value.mean()),
        max_deviation=float(np.max(np.abs(qv - omega_sq.value))),
        dispersion=dispersion,
        omega_sq=float(omega_sq.value),
        omega_sq_levels=tuple(float(x) for x in qv),
        a_levels=tuple(float(x) for x in a_levels.value),
    )
