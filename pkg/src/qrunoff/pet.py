"""Daily potential evapotranspiration from mean temperature and latitude.

Extraterrestrial radiation follows the standard FAO-56 closed form; daily
PET then scales that radiation with a linear temperature term and shuts
off below -5 degC. Everything here is pure and vectorizes over days.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

SOLAR_CONSTANT = 0.0820  # MJ m-2 min-1
LATENT_HEAT_DIVISOR = 2.45  # MJ kg-1 water; converts MJ m-2 day-1 to mm/day
TEMP_OFFSET_C = 5.0
TEMP_DIVISOR = 100.0
DAYS_PER_YEAR = 365.0


@dataclass(frozen=True)
class SolarContext:
    """Latitude (radians) and day of year for the radiation geometry."""

    latitude: float
    day_of_year: int

    def __post_init__(self) -> None:
        if not abs(self.latitude) <= math.pi / 2.0:
            raise DomainError(f"latitude {self.latitude} rad outside +/- pi/2")
        if not 1 <= self.day_of_year <= 366:
            raise DomainError(f"day_of_year {self.day_of_year} outside 1..366")


def _radiation(lat_rad, day_of_year):
    j = np.asarray(day_of_year, dtype=np.float64)
    seasonal = 2.0 * math.pi * j / DAYS_PER_YEAR
    dr = 1.0 + 0.033 * np.cos(seasonal)
    decl = 0.409 * np.sin(seasonal - 1.39)
    # Sunset hour angle; the clamp covers polar day/night.
    cos_ws = np.clip(-math.tan(lat_rad) * np.tan(decl), -1.0, 1.0)
    ws = np.arccos(cos_ws)
    re = (
        (24.0 * 60.0 / math.pi)
        * SOLAR_CONSTANT
        * dr
        * (
            ws * math.sin(lat_rad) * np.sin(decl)
            + math.cos(lat_rad) * np.cos(decl) * np.sin(ws)
        )
    )
    return np.maximum(re, 0.0)


def extraterrestrial_radiation(ctx: SolarContext) -> float:
    """Daily extraterrestrial radiation in MJ m-2 day-1, always >= 0."""
    return float(_radiation(ctx.latitude, ctx.day_of_year))


def oudin_pet(ta, re):
    """PET in mm/day from mean temperature (degC) and radiation.

    Returns (re / 2.45) * (ta + 5) / 100 when ta > -5 degC, else 0.
    """
    ta = np.asarray(ta, dtype=np.float64)
    re = np.asarray(re, dtype=np.float64)
    if np.any(re < 0.0):
        raise DomainError("radiation must be >= 0")
    out = np.where(
        ta + TEMP_OFFSET_C > 0.0,
        re / LATENT_HEAT_DIVISOR * (ta + TEMP_OFFSET_C) / TEMP_DIVISOR,
        0.0,
    )
    return float(out) if out.ndim == 0 else out


def day_of_year(dates: np.ndarray) -> np.ndarray:
    """1-based day of year for an array of datetime64[D] dates."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    year_start = dates.astype("datetime64[Y]").astype("datetime64[D]")
    return (dates - year_start).astype(np.int64) + 1


def oudin_pet_series(
    dates: np.ndarray, tmean: np.ndarray, latitude_deg: float
) -> np.ndarray:
    """Daily PET series for a basin at the given latitude (degrees)."""
    if not -90.0 <= latitude_deg <= 90.0:
        raise DomainError(f"latitude {latitude_deg} outside [-90, 90]")
    doy = day_of_year(dates)
    re = _radiation(math.radians(latitude_deg), doy)
    return oudin_pet(np.asarray(tmean, dtype=np.float64), re)


def write_pet_csv(dates: np.ndarray, pet: np.ndarray, path: str | Path) -> None:
    """Dump a computed PET series for audit."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "pet_mm"])
        for d, value in zip(np.asarray(dates, dtype="datetime64[D]"), pet):
            writer.writerow([str(d), repr(float(value))])
