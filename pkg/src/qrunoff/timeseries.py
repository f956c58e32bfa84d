"""Daily basin time series: CSV ingestion, unit handling and period splits.

Input files follow the CAMELS-style convention used throughout:

* per-basin daily file, header ``date,precip_mm,tmin_C,tmax_C,flow`` with
  ISO-8601 dates, gap-free at daily resolution;
* optional basin metadata file, header ``basin_id,lat_deg,area_km2``.

Flow is volumetric (default ft3/s) or already depth-based (``mm_day``).
Flow values at or below ``MISSING_FLOW_SENTINEL`` are treated as missing
observations and carried as NaN; they are never imputed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    BoundsError,
    ContinuityError,
    DomainError,
    ParseError,
    SchemaError,
)

REQUIRED_COLUMNS = ("date", "precip_mm", "tmin_C", "tmax_C", "flow")
META_COLUMNS = ("basin_id", "lat_deg", "area_km2")
FLOW_UNITS = ("cfs", "mm_day")

# CAMELS streamflow files mark missing days with -999; be tolerant of the
# -9999 variant as well.
MISSING_FLOW_SENTINEL = -999.0

CUBIC_FOOT_M3 = 0.0283168
SECONDS_PER_DAY = 86400.0

# Warm-up shorter than a full year cannot spin up the seasonal store cycle.
MIN_WARMUP_DAYS = 365


@dataclass(frozen=True)
class BasinMeta:
    """Static basin attributes: identifier, gauge latitude, drainage area."""

    basin_id: str
    latitude: float  # degrees north
    area_km2: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise DomainError(f"latitude {self.latitude} outside [-90, 90]")
        if not self.area_km2 > 0.0:
            raise DomainError(f"area_km2 must be > 0, got {self.area_km2}")


@dataclass(frozen=True)
class RawDailyRecord:
    """One day of raw input: precipitation, temperature extremes, flow.

    ``flow`` is NaN when the observation is missing.
    """

    day: date
    precip: float  # mm/day
    tmin: float  # degC
    tmax: float  # degC
    flow: float  # volumetric or mm/day depending on source unit


@dataclass(frozen=True)
class DateRange:
    """Closed interval of calendar days."""

    start: date
    end: date

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise DomainError(f"range end {self.end} before start {self.start}")

    @property
    def n_days(self) -> int:
        return (self.end - self.start).days + 1


@dataclass(frozen=True)
class PeriodSplit:
    """Contiguous warm-up / calibration / validation windows, in order."""

    warmup: DateRange
    calibration: DateRange
    validation: DateRange

    def __post_init__(self) -> None:
        one = timedelta(days=1)
        if self.warmup.end + one != self.calibration.start:
            raise DomainError(
                "calibration must start the day after warm-up ends "
                f"({self.warmup.end} -> {self.calibration.start})"
            )
        if self.calibration.end + one != self.validation.start:
            raise DomainError(
                "validation must start the day after calibration ends "
                f"({self.calibration.end} -> {self.validation.start})"
            )
        if self.warmup.n_days < MIN_WARMUP_DAYS:
            raise DomainError(
                f"warm-up must span at least {MIN_WARMUP_DAYS} days, "
                f"got {self.warmup.n_days}"
            )

    @property
    def start(self) -> date:
        return self.warmup.start

    @property
    def end(self) -> date:
        return self.validation.end


class ForcingSeries:
    """Aligned daily precipitation, PET and observed flow in mm/day.

    Arrays are frozen on construction; slicing produces zero-copy views,
    so a loaded series can be shared across concurrent calibrations.
    """

    __slots__ = ("dates", "precip", "pet", "q_obs")

    def __init__(self, dates, precip, pet, q_obs) -> None:
        dates = np.asarray(dates, dtype="datetime64[D]")
        precip = np.asarray(precip, dtype=np.float64)
        pet = np.asarray(pet, dtype=np.float64)
        q_obs = np.asarray(q_obs, dtype=np.float64)
        n = dates.shape[0]
        if not (precip.shape[0] == pet.shape[0] == q_obs.shape[0] == n):
            raise DomainError("forcing arrays must all have the same length")
        if n == 0:
            raise DomainError("forcing series cannot be empty")
        if np.any(~np.isfinite(precip)) or np.any(precip < 0.0):
            raise DomainError("precip must be finite and >= 0")
        if np.any(~np.isfinite(pet)) or np.any(pet < 0.0):
            raise DomainError("pet must be finite and >= 0")
        with np.errstate(invalid="ignore"):
            if np.any(q_obs[np.isfinite(q_obs)] < 0.0):
                raise DomainError("observed flow must be >= 0 where present")
        for arr in (dates, precip, pet, q_obs):
            arr.setflags(write=False)
        self.dates = dates
        self.precip = precip
        self.pet = pet
        self.q_obs = q_obs

    def __len__(self) -> int:
        return self.dates.shape[0]

    @property
    def start(self) -> date:
        return self.dates[0].astype(date)

    @property
    def end(self) -> date:
        return self.dates[-1].astype(date)

    def view(self, rng: DateRange) -> "ForcingSeries":
        """Zero-copy view of the series over ``rng`` (bounds-checked)."""
        i = self.index_of(rng.start)
        j = self.index_of(rng.end) + 1
        return ForcingSeries(
            self.dates[i:j], self.precip[i:j], self.pet[i:j], self.q_obs[i:j]
        )

    def index_of(self, day: date) -> int:
        """Array index of a calendar day; BoundsError outside the series."""
        offset = (day - self.start).days
        if offset < 0 or offset >= len(self):
            raise BoundsError(
                f"{day} outside series range {self.start}..{self.end}"
            )
        return offset


def load_basin(
    path: str | Path, meta: BasinMeta | None = None, flow_unit: str = "cfs"
) -> list[RawDailyRecord]:
    """Parse a per-basin daily CSV into chronologically sorted records.

    Raises SchemaError on missing columns, ParseError (with the offending
    row number) on bad values, and ContinuityError on date gaps or
    duplicates. ``meta`` and ``flow_unit`` are accepted for interface
    symmetry; unit conversion happens in :func:`make_series`.
    """
    if flow_unit not in FLOW_UNITS:
        raise DomainError(f"flow_unit must be one of {FLOW_UNITS}")
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")

    records: list[RawDailyRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        for row_no, row in enumerate(reader, start=2):
            try:
                day = date.fromisoformat(row["date"].strip())
                precip = float(row["precip_mm"])
                tmin = float(row["tmin_C"])
                tmax = float(row["tmax_C"])
                flow = float(row["flow"])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}: row {row_no}: {exc}") from None
            if not math.isfinite(precip) or precip < 0.0:
                raise ParseError(
                    f"{path}: row {row_no}: precip must be finite and >= 0"
                )
            if not (math.isfinite(tmin) and math.isfinite(tmax)):
                raise ParseError(f"{path}: row {row_no}: non-finite temperature")
            if tmin > tmax:
                raise ParseError(
                    f"{path}: row {row_no}: tmin {tmin} exceeds tmax {tmax}"
                )
            if not math.isfinite(flow) or flow <= MISSING_FLOW_SENTINEL:
                flow = math.nan
            elif flow < 0.0:
                raise ParseError(
                    f"{path}: row {row_no}: negative flow {flow} "
                    "(missing values must use the sentinel)"
                )
            records.append(RawDailyRecord(day, precip, tmin, tmax, flow))

    if not records:
        raise ParseError(f"{path}: no data rows")
    records.sort(key=lambda r: r.day)
    prev = records[0].day
    for rec in records[1:]:
        expect = prev + timedelta(days=1)
        if rec.day == prev:
            raise ContinuityError(f"{path}: duplicate date {rec.day}")
        if rec.day != expect:
            raise ContinuityError(f"{path}: missing date {expect}")
        prev = rec.day
    return records


def load_basin_metadata(path: str | Path) -> dict[str, BasinMeta]:
    """Parse the basin metadata CSV into a basin_id -> BasinMeta map."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    out: dict[str, BasinMeta] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in META_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        for row_no, row in enumerate(reader, start=2):
            basin_id = row["basin_id"].strip()
            try:
                meta = BasinMeta(
                    basin_id, float(row["lat_deg"]), float(row["area_km2"])
                )
            except (TypeError, ValueError, DomainError) as exc:
                raise ParseError(f"{path}: row {row_no}: {exc}") from None
            if basin_id in out:
                raise ParseError(f"{path}: row {row_no}: duplicate basin {basin_id}")
            out[basin_id] = meta
    return out


def write_records_csv(records: list[RawDailyRecord], path: str | Path) -> None:
    """Serialize records back to the input CSV convention (round-trippable)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REQUIRED_COLUMNS)
        for rec in records:
            flow = rec.flow if math.isfinite(rec.flow) else -9999.0
            writer.writerow(
                [rec.day.isoformat(), repr(rec.precip), repr(rec.tmin),
                 repr(rec.tmax), repr(flow)]
            )


def mean_daily_temp(tmin, tmax):
    """Mean daily temperature as the average of the daily extremes."""
    tmin = np.asarray(tmin, dtype=np.float64)
    tmax = np.asarray(tmax, dtype=np.float64)
    if np.any(tmin > tmax):
        raise DomainError("tmin exceeds tmax")
    out = (tmin + tmax) / 2.0
    return float(out) if out.ndim == 0 else out


def flow_to_mm_per_day(flow, area_km2: float):
    """Convert volumetric flow in ft3/s to catchment-average mm/day.

    ft3/s -> m3/day over the basin area in m2, expressed as mm of depth.
    NaN flows (missing observations) pass through unchanged.
    """
    if not area_km2 > 0.0:
        raise DomainError(f"area_km2 must be > 0, got {area_km2}")
    flow = np.asarray(flow, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        if np.any(flow[np.isfinite(flow)] < 0.0):
            raise DomainError("flow must be >= 0")
    out = flow * CUBIC_FOOT_M3 * SECONDS_PER_DAY / (area_km2 * 1e6) * 1000.0
    return float(out) if out.ndim == 0 else out


def make_series(
    records: list[RawDailyRecord],
    pet: np.ndarray,
    meta: BasinMeta,
    flow_unit: str = "cfs",
) -> ForcingSeries:
    """Assemble a ForcingSeries from raw records and a matching PET array."""
    if flow_unit not in FLOW_UNITS:
        raise DomainError(f"flow_unit must be one of {FLOW_UNITS}")
    dates = np.array([r.day for r in records], dtype="datetime64[D]")
    precip = np.array([r.precip for r in records], dtype=np.float64)
    flow = np.array([r.flow for r in records], dtype=np.float64)
    if flow_unit == "cfs":
        q_obs = flow_to_mm_per_day(flow, meta.area_km2)
    else:
        q_obs = flow
    return ForcingSeries(dates, precip, np.asarray(pet, dtype=np.float64), q_obs)


def split(
    series: ForcingSeries, periods: PeriodSplit
) -> tuple[ForcingSeries, ForcingSeries, ForcingSeries]:
    """Cut warm-up, calibration and validation views out of a series.

    The three views partition the covered range; no day is lost or
    duplicated. Raises BoundsError when the split reaches outside the
    series.
    """
    return (
        series.view(periods.warmup),
        series.view(periods.calibration),
        series.view(periods.validation),
    )
