"""Hourly series ingestion, validation and seeded synthetic generation.

The simulator consumes 8760-hour load, wind and PV series.  Real data comes
in as ``timestamp,value_mw`` CSV; synthetic data is generated from a handful
of published aggregates (peak demand, load factor, capacity factors) with a
deterministic seeded process, so bundled datasets are representative rather
than a reproduction of any particular island year.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
from dataclasses import dataclass

import numpy as np

from .domain import HOURS_PER_YEAR

#: Base year used when writing timestamps (non-leap, matches the 8760-h horizon).
_EPOCH = _dt.datetime(2019, 1, 1)


class SeriesError(ValueError):
    """Ingestion failure: bad schema, bad length, gaps or negative values."""


@dataclass(frozen=True)
class HourlySeries:
    """One year of hourly MW values plus recomputable summary statistics."""

    values: np.ndarray
    label: str = ""
    capacity_mw: float | None = None   # nameplate, when the series is generation

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def peak(self) -> float:
        return float(self.values.max())

    @property
    def load_factor(self) -> float:
        return self.mean / self.peak if self.peak > 0 else 0.0

    @property
    def capacity_factor(self) -> float:
        base = self.capacity_mw if self.capacity_mw else self.peak
        return self.mean / base if base > 0 else 0.0

    def stats(self) -> dict[str, float]:
        return {"mean_mw": self.mean, "peak_mw": self.peak,
                "load_factor": self.load_factor,
                "capacity_factor": self.capacity_factor}

    def scaled(self, factor: float, label: str | None = None) -> "HourlySeries":
        cap = self.capacity_mw * factor if self.capacity_mw else None
        return HourlySeries(self.values * factor, label or self.label, cap)


# ----------------------------------------------------------------------
# CSV ingestion / export
# ----------------------------------------------------------------------

def _parse_timestamp(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return _dt.datetime.fromisoformat(text)
    except ValueError:
        return None


def ingest_csv(path, expected_length: int = HOURS_PER_YEAR,
               label: str = "") -> HourlySeries:
    """Read and validate a ``timestamp,value_mw`` file.

    Hard errors (with the offending row number) on parse failures, negative
    values, gaps in integer/ISO timestamps and wrong row counts.
    """
    values: list[float] = []
    stamps = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["timestamp", "value_mw"]:
            raise SeriesError(f"{path}: expected header 'timestamp,value_mw', got {header}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                raise SeriesError(f"{path}: empty row at line {row_no}")
            if len(row) < 2:
                raise SeriesError(f"{path}: row {row_no} has {len(row)} columns, need 2")
            try:
                v = float(row[1])
            except ValueError:
                raise SeriesError(f"{path}: row {row_no}: cannot parse value {row[1]!r}")
            if math.isnan(v):
                raise SeriesError(f"{path}: row {row_no}: value is NaN")
            if v < 0:
                raise SeriesError(f"{path}: row {row_no}: negative value {v}")
            values.append(v)
            stamps.append(_parse_timestamp(row[0].strip()))

    if len(values) != expected_length:
        raise SeriesError(f"{path}: expected {expected_length} rows, got {len(values)}")

    if all(isinstance(s, int) for s in stamps):
        for k in range(1, len(stamps)):
            if stamps[k] != stamps[k - 1] + 1:
                raise SeriesError(f"{path}: timestamp gap at row {k + 2} "
                                  f"({stamps[k - 1]} -> {stamps[k]})")
    elif all(isinstance(s, _dt.datetime) for s in stamps):
        step = _dt.timedelta(hours=1)
        for k in range(1, len(stamps)):
            if stamps[k] - stamps[k - 1] != step:
                raise SeriesError(f"{path}: timestamp gap at row {k + 2} "
                                  f"({stamps[k - 1]} -> {stamps[k]})")

    return HourlySeries(np.array(values), label=label or str(path))


def write_csv(series: HourlySeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value_mw"])
        for h, v in enumerate(series.values):
            stamp = (_EPOCH + _dt.timedelta(hours=h)).isoformat(timespec="minutes")
            w.writerow([stamp, f"{v:.6f}"])


# ----------------------------------------------------------------------
# Synthetic generation
# ----------------------------------------------------------------------

def _calibrate_mean(raw: np.ndarray, target_mean: float) -> np.ndarray:
    """Exponent-warp a [0, 1] profile so its mean hits the target exactly.

    ``raw ** g`` keeps zeros at zero and the maximum at most 1, and its mean
    is continuous and monotone in ``g``, so a bisection always lands.
    """
    positive = raw > 0
    if not positive.any() or target_mean <= 0:
        raise SeriesError(f"mean target {target_mean} unreachable: no positive support")
    if target_mean >= positive.mean():
        raise SeriesError(f"mean target {target_mean} unreachable: "
                          f"support fraction is {positive.mean():.3f}")

    def mean_for(g):
        return float(np.power(raw, g, where=positive, out=np.zeros_like(raw)).mean())

    lo, hi = 1e-3, 1.0
    while mean_for(hi) > target_mean:
        lo, hi = hi, hi * 2
        if hi > 1e3:
            raise SeriesError(f"mean target {target_mean} unreachable by warping")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mean_for(mid) > target_mean:
            lo = mid
        else:
            hi = mid
    g = 0.5 * (lo + hi)
    return np.power(raw, g, where=positive, out=np.zeros_like(raw))


def _hour_of_day(n: int) -> np.ndarray:
    return np.arange(n) % 24


def _day_of_year(n: int) -> np.ndarray:
    return np.arange(n) // 24


def _ar1(rng: np.random.Generator, n: int, rho: float) -> np.ndarray:
    eps = rng.standard_normal(n)
    z = np.empty(n)
    z[0] = eps[0]
    scale = math.sqrt(1.0 - rho * rho)
    for t in range(1, n):
        z[t] = rho * z[t - 1] + scale * eps[t]
    return z


def _synthesize_load(peak_mw: float, load_factor: float,
                     rng: np.random.Generator) -> np.ndarray:
    if not 0 < load_factor <= 1:
        raise SeriesError(f"load factor {load_factor} outside (0, 1]")
    n = HOURS_PER_YEAR
    h = _hour_of_day(n).astype(float)
    d = _day_of_year(n).astype(float)
    # double-peaked daily shape (midday and evening), mild weekend dip
    daily = (0.62
             + 0.16 * np.exp(-0.5 * ((h - 12.5) / 2.3) ** 2)
             + 0.38 * np.exp(-0.5 * ((h - 20.5) / 2.0) ** 2))
    seasonal = 1.0 + 0.18 * np.cos(2 * np.pi * (d - 196.0) / 365.0)
    weekend = np.where((d.astype(int) % 7) >= 5, 0.94, 1.0)
    noise = 1.0 + 0.02 * _ar1(rng, n, 0.8)
    raw = daily * seasonal * weekend * noise
    # affine fit pins both the peak and the mean exactly
    r_max, r_mean = raw.max(), raw.mean()
    target_mean = load_factor * peak_mw
    if r_max <= r_mean:
        raise SeriesError("degenerate load shape")
    alpha = (peak_mw - target_mean) / (r_max - r_mean)
    beta = peak_mw - alpha * r_max
    out = alpha * raw + beta
    if out.min() < 0:
        raise SeriesError(f"load factor {load_factor} unreachable: "
                          "affine fit drives the valley negative")
    return out


def _synthesize_wind(capacity_factor: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 < capacity_factor < 1:
        raise SeriesError(f"capacity factor {capacity_factor} outside (0, 1)")
    n = HOURS_PER_YEAR
    d = _day_of_year(n).astype(float)
    z = _ar1(rng, n, 0.97)
    seasonal = 0.5 * np.cos(2 * np.pi * (d - 15.0) / 365.0)   # windier winters
    raw = 1.0 / (1.0 + np.exp(-(1.4 * z + seasonal)))
    return _calibrate_mean(raw, capacity_factor)


def _synthesize_pv(capacity_factor: float, rng: np.random.Generator,
                   latitude_deg: float = 37.0) -> np.ndarray:
    if not 0 < capacity_factor < 0.5:
        raise SeriesError(f"capacity factor {capacity_factor} outside (0, 0.5)")
    n = HOURS_PER_YEAR
    h = _hour_of_day(n).astype(float)
    d = _day_of_year(n).astype(float)
    decl = np.radians(23.45) * np.sin(2 * np.pi * (284 + d) / 365.0)
    lat = math.radians(latitude_deg)
    cos_ha = np.clip(-np.tan(lat) * np.tan(decl), -1.0, 1.0)
    half_day = np.degrees(np.arccos(cos_ha)) / 15.0          # hours from noon
    frac = (h - 12.0) / np.maximum(half_day, 1e-6)
    daylight = np.abs(frac) < 1.0
    envelope = np.zeros(n)
    envelope[daylight] = np.cos(0.5 * np.pi * frac[daylight]) ** 1.2
    days = n // 24
    clearness_daily = np.clip(0.78 + 0.18 * _ar1(rng, days, 0.6), 0.25, 1.0)
    clearness = np.repeat(clearness_daily, 24)
    wobble = np.clip(1.0 + 0.06 * rng.standard_normal(n), 0.7, 1.2)
    raw = np.clip(envelope * clearness * wobble, 0.0, 1.0)
    return _calibrate_mean(raw, capacity_factor)


def synthesize(kind: str, targets: dict, seed: int) -> HourlySeries:
    """Generate a deterministic 8760-h series hitting the target statistics.

    ``load`` needs ``peak_mw`` and ``load_factor`` (both matched exactly);
    ``wind``/``pv`` need ``capacity_factor`` and accept ``capacity_mw``
    (default 1.0, i.e. a per-MW profile).  Same seed, same bits.
    """
    rng = np.random.default_rng(seed)
    targets = dict(targets)
    if kind == "load":
        peak = float(targets.pop("peak_mw"))
        lf = float(targets.pop("load_factor"))
        values = _synthesize_load(peak, lf, rng)
        capacity = None
        label = f"load(peak={peak:g},lf={lf:g},seed={seed})"
    elif kind == "wind":
        cf = float(targets.pop("capacity_factor"))
        capacity = float(targets.pop("capacity_mw", 1.0))
        values = _synthesize_wind(cf, rng) * capacity
        label = f"wind(cf={cf:g},cap={capacity:g},seed={seed})"
    elif kind == "pv":
        cf = float(targets.pop("capacity_factor"))
        capacity = float(targets.pop("capacity_mw", 1.0))
        values = _synthesize_pv(cf, rng, latitude_deg=float(targets.pop("latitude_deg", 37.0)))
        values = values * capacity
        label = f"pv(cf={cf:g},cap={capacity:g},seed={seed})"
    else:
        raise SeriesError(f"unknown series kind {kind!r}")
    if targets:
        raise SeriesError(f"unknown {kind} targets: {sorted(targets)}")
    return HourlySeries(values, label=label, capacity_mw=capacity)
