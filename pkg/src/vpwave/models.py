"""Eigenfunction model families for volume-at-price probabilities.

Three families, all returning the absolute value of the wave function:

* ``bessel``        C |J0(omega (p - p0))|
* ``superposition`` C (|J0(omega1 (p - p01))| + |J0(omega2 (p - p02))|)
* ``kummer``        C exp(-sqrt(A)|p - p0|) |F(-m, 1, 2 sqrt(A) |p - p0|)|
"""
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType

import numpy as np

from vpwave.errors import DegenerateCurve, InvalidParameters
from vpwave.specfun import MAX_KUMMER_ORDER, bessel_j0, kummer


class Family(str, Enum):
    BESSEL = "bessel"
    SUPERPOSITION = "superposition"
    KUMMER = "kummer"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"besselsingle": "bessel", "besselsuperposition": "superposition"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))


PARAM_NAMES = {
    Family.BESSEL: ("C", "omega", "p0"),
    Family.SUPERPOSITION: ("C", "omega1", "p01", "omega2", "p02"),
    Family.KUMMER: ("C", "m", "A", "p0"),
}


@dataclass(frozen=True)
class ModelSpec:
    family: Family
    params: MappingProxyType

    def __init__(self, family, params):
        family = Family.parse(family)
        names = PARAM_NAMES[family]
        missing = [n for n in names if n not in params]
        if missing:
            raise InvalidParameters(f"{family.value}: missing parameters {missing}")
        clean = {n: float(params[n]) for n in names}
        if family is Family.KUMMER:
            m = params["m"]
            if isinstance(m, bool) or int(m) != m or not 0 <= m <= MAX_KUMMER_ORDER:
                raise InvalidParameters(f"kummer order must be an integer in [0, {MAX_KUMMER_ORDER}]")
            clean["m"] = int(m)
        if family is Family.SUPERPOSITION and clean["p01"] > clean["p02"]:
            clean["omega1"], clean["omega2"] = clean["omega2"], clean["omega1"]
            clean["p01"], clean["p02"] = clean["p02"], clean["p01"]
        for n, v in clean.items():
            if not np.isfinite(v):
                raise InvalidParameters(f"{n} must be finite")
        positive = [n for n in names if n in ("C", "omega", "omega1", "omega2", "A")]
        bad = [n for n in positive if clean[n] <= 0]
        if bad:
            raise InvalidParameters(f"{family.value}: parameters {bad} must be > 0")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", MappingProxyType(clean))

    def __getitem__(self, name):
        return self.params[name]

    @property
    def n_free_params(self):
        """Parameters a fit estimates (the Kummer order is fixed per fit)."""
        if self.family is Family.KUMMER:
            return 3
        return len(PARAM_NAMES[self.family])

    @property
    def center(self):
        if self.family is Family.SUPERPOSITION:
            return self.params["p01"]
        return self.params["p0"]

    def to_json_dict(self):
        return {"family": self.family.value, "params": dict(self.params)}

    @classmethod
    def from_json_dict(cls, data):
        return cls(data["family"], data["params"])

    def __call__(self, p):
        return evaluate(self, p)


@dataclass(frozen=True, eq=False)
class ModelCurve:
    prices: np.ndarray
    values: np.ndarray


def _params(obj):
    return obj.params if isinstance(obj, ModelSpec) else obj


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def eval_bessel_single(params, p):
    q = _params(params)
    x = q["omega"] * (np.asarray(p, dtype=np.float64) - q["p0"])
    return _scalar_or_array(q["C"] * np.abs(bessel_j0(x)))


def eval_superposition(params, p):
    q = _params(params)
    p = np.asarray(p, dtype=np.float64)
    a = np.abs(bessel_j0(q["omega1"] * (p - q["p01"])))
    b = np.abs(bessel_j0(q["omega2"] * (p - q["p02"])))
    return _scalar_or_array(q["C"] * (a + b))


def kummer_wave(m, sqrt_a, x):
    """Signed eigenfunction exp(-s|x|) F(-m, 1, 2 s |x|) with s = sqrt(A)."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    return _scalar_or_array(np.exp(-sqrt_a * ax) * kummer(m, 2.0 * sqrt_a * ax))


def kummer_sqrt_eigenvalue(m, energy):
    """Decay rate sqrt(A_m) = E / (1 + 2m) of the order-m eigenfunction."""
    return energy / (1.0 + 2.0 * m)


def eval_kummer(params, p):
    q = _params(params)
    x = np.asarray(p, dtype=np.float64) - q["p0"]
    return _scalar_or_array(q["C"] * np.abs(kummer_wave(int(q["m"]), np.sqrt(q["A"]), x)))


_EVALUATORS = {
    Family.BESSEL: eval_bessel_single,
    Family.SUPERPOSITION: eval_superposition,
    Family.KUMMER: eval_kummer,
}


def evaluate(spec, p):
    return _EVALUATORS[spec.family](spec.params, p)


def normalize_on_grid(spec, dist):
    """Model probabilities on the distribution's price grid, summing to 1."""
    prices = np.asarray(dist.prices, dtype=np.float64)
    raw = np.atleast_1d(evaluate(spec, prices))
    total = raw.sum()
    if not np.isfinite(total) or total <= 0:
        raise DegenerateCurve(f"{spec.family.value} model vanishes on every grid level")
    values = raw / total
    return ModelCurve(prices=prices, values=values)
