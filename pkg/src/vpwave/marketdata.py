"""Trade ingestion and volume-at-price distributions."""
import csv
import io
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN

import numpy as np

from vpwave.errors import (
    EmptyInput,
    EmptyTrades,
    InvalidParameters,
    NonPositivePrice,
    OffGridPrice,
    ParseError,
)

SCHEMA_VERSION = 1
DEFAULT_TICK = Decimal("0.01")
CSV_HEADER = ("timestamp", "price", "volume")
MIN_SESSION_SPAN_S = 1.0


def as_decimal(value):
    """Decimal from str/int/Decimal; floats go through repr to avoid binary noise."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)


@dataclass(frozen=True, slots=True)
class TradeRecord:
    timestamp: int  # ms since epoch
    price: Decimal
    volume: int

    def __post_init__(self):
        if not isinstance(self.price, Decimal):
            object.__setattr__(self, "price", as_decimal(self.price))
        if not self.price.is_finite() or self.price <= 0:
            raise NonPositivePrice(None, self.price)
        if int(self.volume) != self.volume or self.volume < 0:
            raise InvalidParameters(f"volume must be a non-negative integer, got {self.volume!r}")


def _text_stream(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def ingest_trades(source):
    """Parse ``timestamp,price,volume`` CSV into timestamp-sorted trades.

    ``source`` may be bytes, a binary or text stream.  Data rows are numbered
    from 1 in error messages.
    """
    reader = csv.reader(_text_stream(source))
    header = None
    for header in reader:
        if any(cell.strip() for cell in header):
            break
    if header is None or not any(cell.strip() for cell in header):
        raise EmptyInput("no header line")
    names = tuple(cell.strip().lower().lstrip("﻿") for cell in header)
    if names != CSV_HEADER:
        raise ParseError(0, "header", f"expected {','.join(CSV_HEADER)}, got {','.join(names)}")

    trades = []
    for row, cells in enumerate(reader, start=1):
        if not any(cell.strip() for cell in cells):
            continue
        if len(cells) != 3:
            raise ParseError(row, "row", f"expected 3 fields, got {len(cells)}")
        ts_raw, price_raw, vol_raw = (cell.strip() for cell in cells)
        try:
            ts = int(ts_raw)
        except ValueError:
            raise ParseError(row, "timestamp", repr(ts_raw)) from None
        try:
            price = Decimal(price_raw)
        except InvalidOperation:
            raise ParseError(row, "price", repr(price_raw)) from None
        if not price.is_finite():
            raise ParseError(row, "price", repr(price_raw))
        if price <= 0:
            raise NonPositivePrice(row, price_raw)
        try:
            volume = int(vol_raw)
        except ValueError:
            raise ParseError(row, "volume", repr(vol_raw)) from None
        if volume < 0:
            raise ParseError(row, "volume", f"negative volume {volume}")
        trades.append(TradeRecord(ts, price, volume))
    if not trades:
        raise EmptyInput("no data rows")
    trades.sort(key=lambda t: t.timestamp)
    return trades


def read_trades(path):
    with open(path, "rb") as fh:
        return ingest_trades(fh.read())


def write_trades(trades, stream):
    """Write trades in the ingest CSV format to a text stream."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in trades:
        writer.writerow((t.timestamp, str(t.price), t.volume))


@dataclass(frozen=True, eq=False)
class VolumeAtPrice:
    """Accumulated volume on a contiguous tick grid.

    ``levels`` are integer grid indices (price = level * tick).  Levels inside
    the traded range that saw no volume are kept with volume 0.
    """

    tick: Decimal
    levels: np.ndarray
    volumes: np.ndarray
    session_span: float = MIN_SESSION_SPAN_S
    prices: np.ndarray = field(init=False, repr=False)
    total_volume: float = field(init=False)
    probabilities: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tick = as_decimal(self.tick)
        if not tick.is_finite() or tick <= 0:
            raise InvalidParameters(f"tick must be > 0, got {self.tick}")
        levels = np.asarray(self.levels, dtype=np.int64)
        volumes = np.asarray(self.volumes)
        if volumes.dtype.kind not in "iuf":
            raise InvalidParameters("volumes must be numeric")
        if levels.ndim != 1 or levels.shape != volumes.shape or levels.size == 0:
            raise InvalidParameters("levels and volumes must be equal-length, non-empty 1-d arrays")
        if np.any(np.diff(levels) <= 0):
            raise InvalidParameters("price levels must be strictly ascending")
        if not np.all(np.isfinite(volumes)) or np.any(volumes < 0):
            raise InvalidParameters("volumes must be finite and non-negative")
        total = volumes.sum()
        if total <= 0:
            raise InvalidParameters("total volume must be positive")
        span = max(float(self.session_span), MIN_SESSION_SPAN_S)
        prices = np.array([float(int(lv) * tick) for lv in levels])
        probs = volumes / float(total)
        for arr in (levels, volumes, prices, probs):
            arr.setflags(write=False)
        object.__setattr__(self, "tick", tick)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "volumes", volumes)
        object.__setattr__(self, "session_span", span)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "total_volume", total.item())
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def from_prices(cls, prices, volumes, tick=DEFAULT_TICK, session_span=MIN_SESSION_SPAN_S):
        """Build from explicit grid prices (each must be a multiple of ``tick``)."""
        tick = as_decimal(tick)
        levels = []
        for i, p in enumerate(prices):
            q = as_decimal(p) / tick
            n = q.to_integral_value(rounding=ROUND_HALF_EVEN)
            if n != q:
                raise OffGridPrice(i, p, tick)
            levels.append(int(n))
        return cls(tick, np.array(levels, dtype=np.int64), np.asarray(volumes), session_span)

    @property
    def n_levels(self):
        return int(self.levels.size)

    @property
    def offsets(self):
        """Prices relative to the lowest level, exact multiples of the tick."""
        return (self.levels - self.levels[0]) * float(self.tick)

    def to_json_dict(self):
        vols = [v.item() for v in self.volumes]
        return {
            "schema_version": SCHEMA_VERSION,
            "tick": str(self.tick),
            "prices": [str(int(lv) * self.tick) for lv in self.levels],
            "volumes": vols,
            "total_volume": self.total_volume,
            "session_span_s": self.session_span,
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls.from_prices(
            data["prices"], np.asarray(data["volumes"]), data["tick"], data.get("session_span_s", 1.0)
        )

    def to_json(self, **kwargs):
        return json.dumps(self.to_json_dict(), **kwargs)


def snap_level(price, tick):
    """Nearest grid index for ``price``, or None when it sits half a tick off."""
    q = as_decimal(price) / as_decimal(tick)
    n = q.to_integral_value(rounding=ROUND_HALF_EVEN)
    if abs(q - n) >= Decimal("0.5"):
        return None
    return int(n)


def build_distribution(trades, tick=DEFAULT_TICK):
    """Accumulate trade volume per tick level over the contiguous traded range."""
    if not trades:
        raise EmptyTrades("no trades")
    tick = as_decimal(tick)
    if not tick.is_finite() or tick <= 0:
        raise InvalidParameters(f"tick must be > 0, got {tick}")
    acc = {}
    for i, t in enumerate(trades):
        level = snap_level(t.price, tick)
        if level is None:
            raise OffGridPrice(i, t.price, tick)
        acc[level] = acc.get(level, 0) + int(t.volume)
    if sum(acc.values()) <= 0:
        raise EmptyTrades("all trades have zero volume")
    lo, hi = min(acc), max(acc)
    levels = np.arange(lo, hi + 1, dtype=np.int64)
    volumes = np.array([acc.get(int(lv), 0) for lv in levels], dtype=np.int64)
    stamps = [t.timestamp for t in trades]
    span = (max(stamps) - min(stamps)) / 1000.0
    return VolumeAtPrice(tick, levels, volumes, span)


def price_mean(dist):
    """Volume-weighted mean price sum(P_i p_i), computed exactly in Decimal."""
    weights = [v if isinstance(v, int) else as_decimal(float(v)) for v in (x.item() for x in dist.volumes)]
    total = sum(weights, Decimal(0))
    mean = sum((w * int(lv) for w, lv in zip(weights, dist.levels)), Decimal(0)) * dist.tick / total
    lo, hi = int(dist.levels[0]) * dist.tick, int(dist.levels[-1]) * dist.tick
    return min(max(mean, lo), hi)
