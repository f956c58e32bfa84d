"""Shared synthetic-data helpers for the test suite."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from qrunoff.models import ModelVariant, ParameterSet, run_series
from qrunoff.pet import oudin_pet_series
from qrunoff.timeseries import (
    BasinMeta,
    DateRange,
    ForcingSeries,
    PeriodSplit,
    mean_daily_temp,
)

DEFAULT_LAT = 40.0


def daily_dates(start: date, n_days: int) -> np.ndarray:
    d0 = np.datetime64(start, "D")
    return np.arange(d0, d0 + n_days)


def synthetic_weather(n_days: int, rng: np.random.Generator,
                      start: date = date(1980, 1, 1)):
    """Seasonal precipitation and temperature extremes for n days."""
    dates = daily_dates(start, n_days)
    doy = (dates - dates.astype("datetime64[Y]").astype("datetime64[D]")
           ).astype(int) + 1
    phase = 2.0 * np.pi * (doy - 1) / 365.25
    wet = rng.random(n_days) < 0.45
    amounts = rng.gamma(0.9, 5.0, n_days) * (1.0 + 0.4 * np.sin(phase))
    precip = np.where(wet, amounts, 0.0)
    tmin = 2.0 + 10.0 * np.sin(phase - 0.4) + rng.normal(0.0, 2.0, n_days)
    tmax = tmin + 6.0 + 2.0 * rng.random(n_days)
    return dates, precip, tmin, tmax


def truth_params(rng: np.random.Generator,
                 variant: ModelVariant = ModelVariant.GR4J) -> ParameterSet:
    values = [
        float(rng.uniform(150.0, 500.0)),   # x1
        float(rng.uniform(-1.0, 1.0)),      # x2
        float(rng.uniform(50.0, 200.0)),    # x3
        float(rng.uniform(1.0, 3.0)),       # x4
    ]
    if variant in (ModelVariant.GR5J, ModelVariant.GR6J):
        values.append(float(rng.uniform(-0.3, 0.3)))  # x5
    if variant is ModelVariant.GR6J:
        values.append(float(rng.uniform(2.0, 20.0)))  # x6
    return ParameterSet.from_values(variant, values)


@dataclass
class SyntheticBasin:
    """A generated basin: weather, truth run, and noisy observations."""

    series: ForcingSeries
    params: ParameterSet
    q_true: np.ndarray
    tmin: np.ndarray
    tmax: np.ndarray
    noise_sigma: float


def synthetic_basin(
    seed: int,
    n_days: int,
    start: date = date(1980, 1, 1),
    noise_sigma: float = 0.0,
    latitude: float = DEFAULT_LAT,
    variant: ModelVariant = ModelVariant.GR4J,
) -> SyntheticBasin:
    """Forcing series whose observed flow comes from a known model run.

    With ``noise_sigma > 0`` the observations get iid multiplicative
    lognormal noise, so the conditional level-a quantile of flow is the
    noise-free simulation scaled by exp(sigma * z_a).
    """
    rng = np.random.default_rng(seed)
    dates, precip, tmin, tmax = synthetic_weather(n_days, rng, start)
    tmean = mean_daily_temp(tmin, tmax)
    pet = oudin_pet_series(dates, tmean, latitude)
    params = truth_params(rng, variant)
    q_true, _, _ = run_series(variant, params, precip, pet)
    if noise_sigma > 0.0:
        q_obs = q_true * np.exp(noise_sigma * rng.standard_normal(n_days))
    else:
        q_obs = q_true.copy()
    series = ForcingSeries(dates, precip, pet, q_obs)
    return SyntheticBasin(series, params, q_true, tmin, tmax, noise_sigma)


def make_split(start: date, n_warmup: int, n_calib: int, n_valid: int) -> PeriodSplit:
    w_end = start + timedelta(days=n_warmup - 1)
    c_start = w_end + timedelta(days=1)
    c_end = c_start + timedelta(days=n_calib - 1)
    v_start = c_end + timedelta(days=1)
    v_end = v_start + timedelta(days=n_valid - 1)
    return PeriodSplit(
        warmup=DateRange(start, w_end),
        calibration=DateRange(c_start, c_end),
        validation=DateRange(v_start, v_end),
    )


def write_dataset(
    root: Path,
    basin_ids: list[str],
    n_days: int,
    start: date = date(1980, 1, 1),
    noise_sigma: float = 0.0,
) -> dict[str, BasinMeta]:
    """Write a CAMELS-style dataset directory of synthetic basins (mm/day)."""
    root.mkdir(parents=True, exist_ok=True)
    metas = {}
    for i, basin_id in enumerate(basin_ids):
        basin = synthetic_basin(
            seed=1000 + i, n_days=n_days, start=start, noise_sigma=noise_sigma
        )
        with open(root / f"{basin_id}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", "precip_mm", "tmin_C", "tmax_C", "flow"])
            for j in range(n_days):
                writer.writerow([
                    str(basin.series.dates[j]),
                    repr(float(basin.series.precip[j])),
                    repr(float(basin.tmin[j])),
                    repr(float(basin.tmax[j])),
                    repr(float(basin.series.q_obs[j])),
                ])
        metas[basin_id] = BasinMeta(basin_id, DEFAULT_LAT, 100.0)
    with open(root / "basin_metadata.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["basin_id", "lat_deg", "area_km2"])
        for basin_id, meta in metas.items():
            writer.writerow([basin_id, meta.latitude, meta.area_km2])
    return metas


@pytest.fixture(scope="session")
def small_basin() -> SyntheticBasin:
    return synthetic_basin(seed=7, n_days=1200)
