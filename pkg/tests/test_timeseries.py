"""Ingestion, unit conversion and period splitting."""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest

from qrunoff.errors import (
    BoundsError,
    ContinuityError,
    DomainError,
    ParseError,
    SchemaError,
)
from qrunoff.timeseries import (
    BasinMeta,
    DateRange,
    ForcingSeries,
    PeriodSplit,
    flow_to_mm_per_day,
    load_basin,
    load_basin_metadata,
    make_series,
    mean_daily_temp,
    split,
    write_records_csv,
)

from conftest import daily_dates, make_split


def _write(tmp_path, text, name="basin.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


WELL_FORMED = """date,precip_mm,tmin_C,tmax_C,flow
1980-01-01,1.5,0.0,10.0,3.2
1980-01-02,0.0,-2.0,5.0,3.0
1980-01-03,4.25,1.0,9.0,2.8
"""


class TestLoadBasin:
    def test_well_formed(self, tmp_path):
        records = load_basin(_write(tmp_path, WELL_FORMED))
        assert len(records) == 3
        assert [r.day for r in records] == [
            date(1980, 1, 1), date(1980, 1, 2), date(1980, 1, 3)
        ]
        assert records[2].precip == 4.25

    def test_unsorted_input_is_sorted(self, tmp_path):
        shuffled = WELL_FORMED.splitlines()
        text = "\n".join([shuffled[0], shuffled[2], shuffled[1], shuffled[3]]) + "\n"
        records = load_basin(_write(tmp_path, text))
        assert [r.day for r in records] == [
            date(1980, 1, 1), date(1980, 1, 2), date(1980, 1, 3)
        ]

    def test_gap_reports_missing_date(self, tmp_path):
        text = WELL_FORMED.replace("1980-01-02,0.0,-2.0,5.0,3.0\n", "")
        with pytest.raises(ContinuityError, match="1980-01-02"):
            load_basin(_write(tmp_path, text))

    def test_duplicate_date(self, tmp_path):
        text = WELL_FORMED + "1980-01-03,0.0,0.0,1.0,2.0\n"
        with pytest.raises(ContinuityError, match="duplicate"):
            load_basin(_write(tmp_path, text))

    def test_missing_column_is_schema_error(self, tmp_path):
        text = WELL_FORMED.replace("precip_mm", "precip")
        with pytest.raises(SchemaError, match="precip_mm"):
            load_basin(_write(tmp_path, text))

    def test_unparsable_numeric_names_row(self, tmp_path):
        text = WELL_FORMED.replace("4.25", "4.2x")
        with pytest.raises(ParseError, match="row 4"):
            load_basin(_write(tmp_path, text))

    @pytest.mark.parametrize("sentinel", ["-9999", "-999"])
    def test_flow_sentinel_becomes_missing(self, tmp_path, sentinel):
        text = WELL_FORMED.replace("3.0\n", sentinel + "\n")
        records = load_basin(_write(tmp_path, text))
        assert np.isnan(records[1].flow)
        assert not np.isnan(records[0].flow)

    def test_small_negative_flow_rejected(self, tmp_path):
        text = WELL_FORMED.replace("3.0\n", "-0.5\n")
        with pytest.raises(ParseError, match="row 3"):
            load_basin(_write(tmp_path, text))

    def test_negative_precip_rejected(self, tmp_path):
        text = WELL_FORMED.replace("1.5", "-1.5")
        with pytest.raises(ParseError, match="row 2"):
            load_basin(_write(tmp_path, text))

    def test_tmin_above_tmax_rejected(self, tmp_path):
        text = WELL_FORMED.replace("-2.0,5.0", "6.0,5.0")
        with pytest.raises(ParseError, match="row 3"):
            load_basin(_write(tmp_path, text))

    def test_round_trip(self, tmp_path):
        text = WELL_FORMED.replace("3.0\n", "-9999\n")
        records = load_basin(_write(tmp_path, text))
        out = tmp_path / "rewritten.csv"
        write_records_csv(records, out)
        again = load_basin(out)
        for a, b in zip(records, again):
            assert a.day == b.day
            for field in ("precip", "tmin", "tmax"):
                va, vb = getattr(a, field), getattr(b, field)
                assert vb == pytest.approx(va, rel=1e-9)
            assert (np.isnan(a.flow) and np.isnan(b.flow)) or a.flow == b.flow


class TestMetadata:
    def test_load(self, tmp_path):
        path = _write(
            tmp_path,
            "basin_id,lat_deg,area_km2\n01013500,47.2,2252.7\n",
            "meta.csv",
        )
        metas = load_basin_metadata(path)
        assert metas["01013500"].area_km2 == 2252.7

    def test_bad_latitude(self, tmp_path):
        path = _write(
            tmp_path, "basin_id,lat_deg,area_km2\nb1,95.0,10.0\n", "meta.csv"
        )
        with pytest.raises(ParseError):
            load_basin_metadata(path)

    def test_meta_invariants(self):
        with pytest.raises(DomainError):
            BasinMeta("b", 10.0, -5.0)


class TestMeanDailyTemp:
    def test_basic_average(self):
        assert mean_daily_temp(0.0, 10.0) == 5.0

    def test_negative_values(self):
        assert mean_daily_temp(-3.0, -1.0) == -2.0

    def test_degenerate_equal(self):
        assert mean_daily_temp(5.0, 5.0) == 5.0

    def test_ordering_error(self):
        with pytest.raises(DomainError):
            mean_daily_temp(3.0, 2.0)

    def test_vectorized(self):
        out = mean_daily_temp(np.array([0.0, -3.0]), np.array([10.0, -1.0]))
        np.testing.assert_allclose(out, [5.0, -2.0])


def _conversion_oracle(flow_cfs: float, area_km2: float) -> float:
    # ft3/s -> m3/s -> m3/day, spread over the area in m2, metres -> mm
    m3_per_day = flow_cfs * 0.0283168 * 86400.0
    metres_per_day = m3_per_day / (area_km2 * 1e6)
    return metres_per_day * 1000.0


class TestFlowConversion:
    def test_zero_flow(self):
        assert flow_to_mm_per_day(0.0, 123.4) == 0.0

    def test_unit_area_oracle(self):
        expected = _conversion_oracle(1.0, 2.446576)
        got = flow_to_mm_per_day(1.0, 2.446576)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(1.0, rel=1e-5)

    def test_linearity(self):
        expected = _conversion_oracle(10.0, 2.446576)
        assert flow_to_mm_per_day(10.0, 2.446576) == pytest.approx(
            expected, rel=1e-12
        )
        rng = np.random.default_rng(3)
        for _ in range(50):
            q = float(rng.uniform(0.0, 500.0))
            k = float(rng.uniform(0.0, 10.0))
            area = float(rng.uniform(1.0, 5000.0))
            assert flow_to_mm_per_day(k * q, area) == pytest.approx(
                k * flow_to_mm_per_day(q, area), rel=1e-12, abs=1e-15
            )

    def test_bad_area(self):
        with pytest.raises(DomainError):
            flow_to_mm_per_day(1.0, 0.0)

    def test_nan_passthrough(self):
        assert np.isnan(flow_to_mm_per_day(float("nan"), 10.0))


def _series(n_days: int, start=date(1980, 1, 1)) -> ForcingSeries:
    dates = daily_dates(start, n_days)
    ones = np.ones(n_days)
    return ForcingSeries(dates, ones, ones, ones)


class TestForcingSeries:
    def test_length_mismatch(self):
        dates = daily_dates(date(1980, 1, 1), 3)
        with pytest.raises(DomainError):
            ForcingSeries(dates, np.ones(3), np.ones(3), np.ones(2))

    def test_negative_precip_rejected(self):
        dates = daily_dates(date(1980, 1, 1), 2)
        with pytest.raises(DomainError):
            ForcingSeries(dates, np.array([1.0, -0.1]), np.ones(2), np.ones(2))

    def test_missing_flow_allowed(self):
        dates = daily_dates(date(1980, 1, 1), 2)
        s = ForcingSeries(dates, np.ones(2), np.ones(2),
                          np.array([1.0, np.nan]))
        assert np.isnan(s.q_obs[1])

    def test_arrays_frozen(self):
        s = _series(5)
        with pytest.raises(ValueError):
            s.precip[0] = 2.0


class TestSplit:
    def test_protocol_split_lengths(self):
        # calendar-enumeration oracle for the 1980-2013 protocol windows
        def count(a: date, b: date) -> int:
            n, d = 0, a
            while d <= b:
                n += 1
                d += timedelta(days=1)
            return n

        n_w = count(date(1980, 1, 1), date(1981, 12, 31))
        n_c = count(date(1982, 1, 1), date(1997, 12, 31))
        n_v = count(date(1998, 1, 1), date(2013, 12, 31))
        assert (n_w, n_c, n_v) == (731, 5844, 5844)

        series = _series(n_w + n_c + n_v)
        periods = PeriodSplit(
            warmup=DateRange(date(1980, 1, 1), date(1981, 12, 31)),
            calibration=DateRange(date(1982, 1, 1), date(1997, 12, 31)),
            validation=DateRange(date(1998, 1, 1), date(2013, 12, 31)),
        )
        w, c, v = split(series, periods)
        assert (len(w), len(c), len(v)) == (731, 5844, 5844)

    def test_views_partition_series(self):
        series = _series(500 + 400 + 300)
        periods = make_split(date(1980, 1, 1), 500, 400, 300)
        w, c, v = split(series, periods)
        rejoined = np.concatenate([w.dates, c.dates, v.dates])
        np.testing.assert_array_equal(rejoined, series.dates)

    def test_overlapping_ranges_rejected(self):
        with pytest.raises(DomainError):
            PeriodSplit(
                warmup=DateRange(date(1980, 1, 1), date(1981, 12, 31)),
                calibration=DateRange(date(1981, 6, 1), date(1990, 12, 31)),
                validation=DateRange(date(1991, 1, 1), date(1995, 12, 31)),
            )

    def test_short_warmup_rejected(self):
        with pytest.raises(DomainError, match="warm-up"):
            make_split(date(1980, 1, 1), 100, 400, 300)

    def test_split_outside_series(self):
        series = _series(900)
        periods = make_split(date(1980, 1, 1), 400, 400, 300)
        with pytest.raises(BoundsError):
            split(series, periods)

    def test_empty_range_unrepresentable(self):
        # an empty warm-up cannot even be expressed as a DateRange
        with pytest.raises(DomainError):
            DateRange(date(1980, 1, 2), date(1980, 1, 1))


class TestMakeSeries:
    def test_flow_unit_conversion(self, tmp_path):
        path = _write(tmp_path, WELL_FORMED)
        records = load_basin(path)
        meta = BasinMeta("b", 45.0, 2.446576)
        pet = np.zeros(3)
        mm = make_series(records, pet, meta, flow_unit="mm_day")
        cfs = make_series(records, pet, meta, flow_unit="cfs")
        np.testing.assert_allclose(
            cfs.q_obs, [_conversion_oracle(f, 2.446576) for f in mm.q_obs]
        )
