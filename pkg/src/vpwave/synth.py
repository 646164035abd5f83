"""Seeded synthetic trade streams whose volume-at-price follows a model."""
from dataclasses import dataclass, replace
from decimal import Decimal

import numpy as np
from scipy.optimize import brentq

from vpwave.errors import DegenerateCurve, InvalidParameters
from vpwave.marketdata import TradeRecord, VolumeAtPrice, as_decimal
from vpwave.models import Family, ModelSpec, evaluate

# 2003-06-02 09:30 Asia/Shanghai
DEFAULT_START_MS = 1054517400000
DEFAULT_SESSION_S = 4 * 3600.0


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.  ``spec=None`` yields a flat (uniform) profile."""

    spec: ModelSpec | None
    tick: Decimal
    price_range: tuple
    total_volume: int
    trades: int
    noise: float = 0.0
    seed: int = 0
    start_ms: int = DEFAULT_START_MS
    session_s: float = DEFAULT_SESSION_S

    def __post_init__(self):
        tick = as_decimal(self.tick)
        lo, hi = (as_decimal(v) for v in self.price_range)
        object.__setattr__(self, "tick", tick)
        object.__setattr__(self, "price_range", (lo, hi))
        if tick <= 0 or not lo < hi or lo <= 0:
            raise InvalidParameters("need tick > 0 and 0 < lo < hi")
        if (lo / tick) % 1 or (hi / tick) % 1:
            raise InvalidParameters("price range ends must lie on the tick grid")
        if self.spec is not None and not lo < Decimal(repr(self.spec.center)) < hi:
            raise InvalidParameters("model center must lie strictly inside the price range")
        if not 1 <= self.trades <= self.total_volume:
            raise InvalidParameters("need total_volume >= trades >= 1")
        if not 0.0 <= self.noise < 1.0:
            raise InvalidParameters("noise must be in [0, 1)")

    @property
    def levels(self):
        lo, hi = self.price_range
        return np.arange(int(lo / self.tick), int(hi / self.tick) + 1, dtype=np.int64)

    @property
    def prices(self):
        return np.array([float(int(lv) * self.tick) for lv in self.levels])

    def to_json_dict(self):
        return {
            "spec": None if self.spec is None else self.spec.to_json_dict(),
            "tick": str(self.tick),
            "price_range": [str(v) for v in self.price_range],
            "total_volume": self.total_volume,
            "trades": self.trades,
            "noise": self.noise,
            "seed": self.seed,
            "start_ms": self.start_ms,
            "session_s": self.session_s,
        }

    @classmethod
    def from_json_dict(cls, data):
        spec = data.get("spec")
        return cls(
            spec=None if spec is None else ModelSpec.from_json_dict(spec),
            tick=data["tick"],
            price_range=tuple(data["price_range"]),
            total_volume=int(data["total_volume"]),
            trades=int(data["trades"]),
            noise=float(data.get("noise", 0.0)),
            seed=int(data.get("seed", 0)),
            start_ms=int(data.get("start_ms", DEFAULT_START_MS)),
            session_s=float(data.get("session_s", DEFAULT_SESSION_S)),
        )


def largest_remainder(total, weights):
    """Integer allocation of ``total`` proportional to ``weights``, summing exactly."""
    w = np.asarray(weights, dtype=np.float64)
    s = w.sum()
    if s <= 0:
        raise DegenerateCurve("all allocation weights are zero")
    quotas = w / s * total
    base = np.floor(quotas).astype(np.int64)
    short = int(total) - int(base.sum())
    frac = quotas - base
    if short > 0:
        order = np.argsort(-frac, kind="stable")
        base[order[:short]] += 1
    elif short < 0:
        order = np.argsort(frac, kind="stable")
        order = order[base[order] > 0]
        base[order[:-short]] -= 1
    return base


def model_curve(config):
    """Normalized target probabilities on the configured grid."""
    prices = config.prices
    if config.spec is None:
        raw = np.ones_like(prices)
    else:
        raw = np.atleast_1d(evaluate(config.spec, prices))
    total = raw.sum()
    if total <= 0 or not np.isfinite(total):
        raise DegenerateCurve("model vanishes on every grid level")
    return raw / total


def level_volumes(config):
    """Per-level share counts after multiplicative noise, summing to total_volume."""
    rng = np.random.default_rng(config.seed)
    curve = model_curve(config)
    z = np.clip(rng.standard_normal(curve.size), -3.0, 3.0)
    weights = np.maximum(curve * (1.0 + config.noise * z), 0.0)
    return largest_remainder(config.total_volume, weights), rng


def _split_into_trades(levels, volumes, n_trades, tick):
    nonzero = volumes > 0
    counts = np.zeros_like(volumes)
    counts[nonzero] = largest_remainder(n_trades, volumes[nonzero])
    counts = np.minimum(np.maximum(counts, nonzero.astype(np.int64)), volumes)
    out = []
    for level, vol, cnt in zip(levels, volumes, counts):
        if cnt == 0:
            continue
        base, extra = divmod(int(vol), int(cnt))
        price = int(level) * tick
        out.extend((price, base + 1) for _ in range(extra))
        out.extend((price, base) for _ in range(int(cnt) - extra))
    return out


def _stamp(pieces, rng, start_ms, session_s):
    order = rng.permutation(len(pieces))
    n = len(pieces)
    span_ms = int(round(session_s * 1000))
    trades = []
    for i, j in enumerate(order):
        offset = 0 if n == 1 else (i * span_ms) // (n - 1)
        price, vol = pieces[j]
        trades.append(TradeRecord(start_ms + offset, price, vol))
    return trades


def generate(config):
    """Trades whose volume-at-price follows ``config.spec`` (deterministic in seed)."""
    volumes, rng = level_volumes(config)
    pieces = _split_into_trades(config.levels, volumes, config.trades, config.tick)
    return _stamp(pieces, rng, config.start_ms, config.session_s)


def _recenter(spec, center):
    if spec is None or spec.family is Family.SUPERPOSITION:
        raise InvalidParameters("two-equilibrium generation needs a single-center model")
    params = dict(spec.params)
    params["p0"] = float(as_decimal(center))
    return ModelSpec(spec.family, params)


def generate_two_equilibrium(config, second_center, mix):
    """Session split between the configured center and ``second_center``.

    The first ``mix`` share of volume (and of the session) follows the
    configured model; the remainder follows the same model shifted to
    ``second_center``.
    """
    if not 0.0 < mix <= 1.0:
        raise InvalidParameters("mix must be in (0, 1]")
    lo, hi = config.price_range
    center = as_decimal(second_center)
    if not lo < center < hi:
        raise InvalidParameters("second center must lie inside the price range")
    if mix == 1.0:
        return generate(config)
    v1 = int(round(mix * config.total_volume))
    v2 = config.total_volume - v1
    t1 = min(max(1, int(round(mix * config.trades))), v1)
    t2 = min(max(1, config.trades - t1), v2)
    span1 = config.session_s * mix
    first = replace(config, total_volume=v1, trades=t1, session_s=span1)
    second = replace(
        config,
        spec=_recenter(config.spec, center),
        total_volume=v2,
        trades=t2,
        seed=config.seed + 7919,
        start_ms=config.start_ms + int(round(span1 * 1000)) + 1,
        session_s=config.session_s - span1,
    )
    return generate(first) + generate(second)


def energy_balanced_distribution(prices, p0, session_span=1000.0, total_volume=1.0e6, tick="0.01"):
    """A distribution whose levels satisfy the energy balance with a linear potential.

    Solves, per level, v (1 - v/V) p / t^2 = A (p - p0) together with
    sum(v) = V.  Returns ``(dist, A)``; volumes are real-valued.
    Every price must be above ``p0``.
    """
    prices = np.asarray(prices, dtype=np.float64)
    d = (prices - p0) / prices
    if np.any(d <= 0):
        raise InvalidParameters("all levels must lie above p0")

    def share(s):
        return 0.5 * (1.0 - np.sqrt(np.maximum(1.0 - 4.0 * s * d, 0.0)))

    s_max = 0.25 / d.max()
    if share(s_max).sum() < 1.0:
        raise InvalidParameters("too few levels to balance the energy with a linear potential")
    s = brentq(lambda s: share(s).sum() - 1.0, 0.0, s_max, xtol=1e-300, rtol=1e-15)
    u = share(s)
    u = u / u.sum()
    volumes = u * total_volume
    a = s * total_volume / session_span**2
    dist = VolumeAtPrice.from_prices([repr(float(p)) for p in prices], volumes, tick, session_span)
    return dist, a


def coherent_dwell_times(dist, omega):
    """Per-level times t_i under which (v_i/V) v_i / t_i^2 = omega^2 at every level.

    Equivalent to a constant trading rate v_i / t_i = omega sqrt(V) across
    levels (natural units).  Levels with no volume get the session span.
    """
    rate = float(omega) * np.sqrt(dist.total_volume)
    vols = np.asarray(dist.volumes, dtype=np.float64)
    return np.where(vols > 0, vols / rate, dist.session_span)
