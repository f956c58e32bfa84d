"""Batch protocol: calibrate basins x models x losses, score, summarize.

A run is driven by a single YAML config and writes a deterministic
artifact tree:

    output_dir/
      manifest.json            run provenance (config hash, versions, skips)
      parameters.csv           one row per calibrated (basin, model, loss)
      scores.csv               per-period average score and coverage
      crossings.csv            quantile-crossing diagnostic per level pair
      summary/                 relative-score and coverage tables
      plots/                   hydrograph / scatter exports (on demand)

Rerunning an identical config reproduces identical bytes; every CSV
carries the manifest hash on a leading comment line.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from . import __version__
from .calibration import CalibOptions, CalibrationResult, calibrate
from .errors import (
    BenchmarkDegenerateError,
    ConfigError,
    DataError,
    DomainError,
    EmptyScoreError,
    QRunoffError,
    SelectionError,
)
from .models import ModelVariant, ParameterSet, simulate
from .pet import oudin_pet_series
from .scoring import (
    QUANTILE,
    SQUARED_ERROR,
    LossSpec,
    ScoreRecord,
    average_score,
    coverage,
    crossing_rate,
    relative_score,
)
from .timeseries import (
    FLOW_UNITS,
    BasinMeta,
    DateRange,
    ForcingSeries,
    PeriodSplit,
    load_basin,
    load_basin_metadata,
    make_series,
    mean_daily_temp,
    split,
)

logger = logging.getLogger(__name__)

DATA_ROOT_ENV = "QRUNOFF_DATA_ROOT"
METADATA_FILENAME = "basin_metadata.csv"
DEFAULT_LEVELS = (0.025, 0.050, 0.100, 0.500, 0.900, 0.950, 0.975)

HISTOGRAM_LIMIT = 0.5  # display truncation for relative-score histograms
HISTOGRAM_BINS = 40

PARAM_COLUMNS = [
    "basin_id", "model", "loss_kind", "level",
    "x1", "x2", "x3", "x4", "x5", "x6",
    "score_calib", "converged", "n_evals",
]
SCORE_COLUMNS = [
    "basin_id", "model", "loss_kind", "level", "period",
    "avg_score", "coverage", "n_days",
]
CROSSING_COLUMNS = [
    "basin_id", "model", "level_low", "level_high", "period",
    "crossing_rate", "n_violations",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved run settings; see README for the YAML layout."""

    data_dir: Path
    output_dir: Path
    basins: tuple[str, ...] | str  # explicit ids or "all"
    flow_unit: str
    periods: PeriodSplit
    variants: tuple[ModelVariant, ...]
    levels: tuple[float, ...]
    include_squared_error: bool
    benchmark: ModelVariant
    calib_options: CalibOptions
    workers: int
    seed: int

    def __post_init__(self) -> None:
        if not self.variants:
            raise ConfigError("at least one model variant is required")
        if len(set(self.variants)) != len(self.variants):
            raise ConfigError("variants must be unique")
        if self.benchmark not in self.variants:
            raise ConfigError(
                f"benchmark {self.benchmark.value} not among the variants"
            )
        if not self.levels and not self.include_squared_error:
            raise ConfigError("no loss functions selected")
        for a in self.levels:
            if not 0.0 < a < 1.0:
                raise ConfigError(f"quantile level {a} outside (0, 1)")
        if any(b >= c for b, c in zip(self.levels, self.levels[1:])):
            raise ConfigError("levels must be strictly increasing")
        if self.flow_unit not in FLOW_UNITS:
            raise ConfigError(f"flow_unit must be one of {FLOW_UNITS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.basins != "all" and not self.basins:
            raise ConfigError("basin list cannot be empty")

    def loss_specs(self) -> list[LossSpec]:
        specs = [LossSpec.quantile(a) for a in self.levels]
        if self.include_squared_error:
            specs.append(LossSpec.squared_error())
        return specs

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            return cls._build(raw)
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            raise ConfigError(f"invalid config: {exc}") from None

    @classmethod
    def _build(cls, raw: dict) -> "ExperimentConfig":
        data_dir = Path(os.environ.get(DATA_ROOT_ENV) or raw["data_dir"])
        basins = raw.get("basins", "all")
        if basins != "all":
            basins = tuple(str(b) for b in basins)
        periods = PeriodSplit(
            warmup=_date_range(raw["split"]["warmup"]),
            calibration=_date_range(raw["split"]["calibration"]),
            validation=_date_range(raw["split"]["validation"]),
        )
        variants = tuple(ModelVariant(v) for v in raw.get(
            "variants", [m.value for m in ModelVariant]))
        calib = CalibOptions(seed=int(raw.get("seed", 0)),
                             **raw.get("calibration", {}))
        return cls(
            data_dir=data_dir,
            output_dir=Path(raw["output_dir"]),
            basins=basins,
            flow_unit=raw.get("flow_unit", "cfs"),
            periods=periods,
            variants=variants,
            levels=tuple(float(a) for a in raw.get("levels", DEFAULT_LEVELS)),
            include_squared_error=bool(raw.get("include_squared_error", True)),
            benchmark=ModelVariant(raw.get("benchmark", "GR4J")),
            calib_options=calib,
            workers=int(raw.get("workers", 1)),
            seed=int(raw.get("seed", 0)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"no such config file: {path}")
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        return cls.from_dict(raw)

    def to_canonical_dict(self) -> dict:
        return {
            "data_dir": str(self.data_dir),
            "output_dir": str(self.output_dir),
            "basins": "all" if self.basins == "all" else list(self.basins),
            "flow_unit": self.flow_unit,
            "split": {
                name: {"start": rng.start.isoformat(), "end": rng.end.isoformat()}
                for name, rng in (
                    ("warmup", self.periods.warmup),
                    ("calibration", self.periods.calibration),
                    ("validation", self.periods.validation),
                )
            },
            "variants": [v.value for v in self.variants],
            "levels": list(self.levels),
            "include_squared_error": self.include_squared_error,
            "benchmark": self.benchmark.value,
            "calibration": {
                "screening_design": self.calib_options.screening_design,
                "initial_step": self.calib_options.initial_step,
                "shrink": self.calib_options.shrink,
                "stop_step": self.calib_options.stop_step,
                "max_iterations": self.calib_options.max_iterations,
            },
            "workers": self.workers,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_canonical_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


def _date_range(raw: dict) -> DateRange:
    return DateRange(_as_date(raw["start"]), _as_date(raw["end"]))


def _as_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def load_forcing(
    data_dir: Path, meta: BasinMeta, flow_unit: str
) -> ForcingSeries:
    """Load a basin file and derive PET from temperature and latitude."""
    records = load_basin(data_dir / f"{meta.basin_id}.csv", meta, flow_unit)
    dates = np.array([r.day for r in records], dtype="datetime64[D]")
    tmin = np.array([r.tmin for r in records])
    tmax = np.array([r.tmax for r in records])
    tmean = mean_daily_temp(tmin, tmax)
    pet = oudin_pet_series(dates, tmean, meta.latitude)
    return make_series(records, pet, meta, flow_unit)


@dataclass
class BasinResult:
    basin_id: str
    param_rows: list[dict]
    score_records: list[ScoreRecord]
    crossing_rows: list[dict]


@dataclass
class RunArtifacts:
    output_dir: Path
    manifest: dict
    score_records: list[ScoreRecord]
    skipped: dict[str, str]


def _spec_fields(spec: LossSpec) -> tuple[str, float]:
    return spec.kind, (spec.level if spec.level is not None else math.nan)


def run_basin(
    config: ExperimentConfig, meta: BasinMeta, forcing: ForcingSeries
) -> BasinResult:
    """Calibrate and score every (variant, loss) setup for one basin."""
    periods = config.periods
    n_calib = periods.calibration.n_days
    _, calib_view, valid_view = split(forcing, periods)
    param_rows: list[dict] = []
    records: list[ScoreRecord] = []
    crossing_rows: list[dict] = []
    for variant in config.variants:
        sims_by_level: dict[float, dict[str, np.ndarray]] = {}
        for spec in config.loss_specs():
            result = calibrate(variant, forcing, periods, spec, config.calib_options)
            run = simulate(variant, result.params, forcing, periods)
            segments = {
                "calibration": (run.q_sim[:n_calib], calib_view.q_obs),
                "validation": (run.q_sim[n_calib:], valid_view.q_obs),
            }
            if spec.kind == QUANTILE:
                sims_by_level[spec.level] = {
                    p: q for p, (q, _) in segments.items()
                }
            kind, level = _spec_fields(spec)
            param_rows.append(_param_row(meta.basin_id, variant, kind, level, result))
            for period, (q, obs) in segments.items():
                try:
                    records.append(ScoreRecord(
                        basin_id=meta.basin_id,
                        variant=variant.value,
                        loss=spec,
                        period=period,
                        avg_score=average_score(q, obs, spec),
                        coverage=coverage(q, obs),
                        n_days=int(np.isfinite(obs).sum()),
                    ))
                except EmptyScoreError:
                    logger.warning(
                        "basin %s %s %s: no observations in %s period",
                        meta.basin_id, variant.value, spec.label, period,
                    )
        # diagnostic only: mean simulated flow should tend to grow with the
        # level; inversions are the known crossing drawback, so they are
        # reported, never asserted
        means = {
            a: float(np.mean(sims["validation"]))
            for a, sims in sims_by_level.items()
        }
        for a_low, a_high in zip(config.levels, config.levels[1:]):
            if a_low in means and a_high in means and means[a_low] > means[a_high]:
                logger.info(
                    "basin %s %s: mean simulated flow at level %g exceeds "
                    "level %g (%.4f > %.4f)",
                    meta.basin_id, variant.value, a_low, a_high,
                    means[a_low], means[a_high],
                )
        for a_low, a_high in zip(config.levels, config.levels[1:]):
            if a_low not in sims_by_level or a_high not in sims_by_level:
                continue
            for period in ("calibration", "validation"):
                rate, violations = crossing_rate(
                    sims_by_level[a_low][period],
                    sims_by_level[a_high][period],
                    a_low, a_high,
                )
                crossing_rows.append({
                    "basin_id": meta.basin_id,
                    "model": variant.value,
                    "level_low": a_low,
                    "level_high": a_high,
                    "period": period,
                    "crossing_rate": rate,
                    "n_violations": int(violations.size),
                })
    return BasinResult(meta.basin_id, param_rows, records, crossing_rows)


def _param_row(
    basin_id: str, variant: ModelVariant, kind: str, level: float,
    result: CalibrationResult,
) -> dict:
    row = {
        "basin_id": basin_id,
        "model": variant.value,
        "loss_kind": kind,
        "level": level,
        "x1": math.nan, "x2": math.nan, "x3": math.nan,
        "x4": math.nan, "x5": math.nan, "x6": math.nan,
    }
    for name, value in zip(variant.param_names, result.params.values()):
        row[name] = float(value)
    row.update(
        score_calib=result.score,
        converged=result.converged,
        n_evals=result.n_evaluations,
    )
    return row


def run_experiment(config: ExperimentConfig) -> RunArtifacts:
    """Execute the full protocol and write the artifact tree."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    meta_map = load_basin_metadata(config.data_dir / METADATA_FILENAME)
    if config.basins == "all":
        basin_ids = sorted(meta_map)
    else:
        basin_ids = list(config.basins)

    skipped: dict[str, str] = {}
    results: dict[str, BasinResult] = {}

    def job(basin_id: str) -> BasinResult:
        if basin_id not in meta_map:
            raise DataError(f"basin {basin_id} not in {METADATA_FILENAME}")
        meta = meta_map[basin_id]
        forcing = load_forcing(config.data_dir, meta, config.flow_unit)
        # fail fast when the series does not cover the configured windows
        forcing.view(DateRange(config.periods.start, config.periods.end))
        return run_basin(config, meta, forcing)

    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
            futures = {b: pool.submit(job, b) for b in basin_ids}
            for basin_id, future in futures.items():
                try:
                    results[basin_id] = future.result()
                except QRunoffError as exc:
                    logger.warning("skipping basin %s: %s", basin_id, exc)
                    skipped[basin_id] = str(exc)
    else:
        for basin_id in basin_ids:
            try:
                results[basin_id] = job(basin_id)
            except QRunoffError as exc:
                logger.warning("skipping basin %s: %s", basin_id, exc)
                skipped[basin_id] = str(exc)

    ordered = [results[b] for b in basin_ids if b in results]
    param_rows = [row for r in ordered for row in r.param_rows]
    records = [rec for r in ordered for rec in r.score_records]
    crossing_rows = [row for r in ordered for row in r.crossing_rows]

    manifest = build_manifest(config, [r.basin_id for r in ordered], skipped,
                              n_param_rows=len(param_rows))
    run_hash = manifest["config_hash"]

    write_csv(pd.DataFrame(param_rows, columns=PARAM_COLUMNS),
              out / "parameters.csv", run_hash)
    write_csv(records_frame(records), out / "scores.csv", run_hash)
    write_csv(pd.DataFrame(crossing_rows, columns=CROSSING_COLUMNS),
              out / "crossings.csv", run_hash)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    tables = summarize(records, config)
    write_summary(tables, out / "summary", run_hash)
    return RunArtifacts(out, manifest, records, skipped)


def build_manifest(
    config: ExperimentConfig, basins_run: list[str], skipped: dict[str, str],
    n_param_rows: int,
) -> dict:
    return {
        "config": config.to_canonical_dict(),
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "versions": {
            "qrunoff": __version__,
            "numpy": np.__version__,
            "pandas": pd.__version__,
        },
        "policies": {
            "missing_flow": "values <= -999 masked, never imputed",
            "score_masking": "pairwise on missing observations; "
                             "identical mask across models per basin",
            "coverage_tie_rule": "ties between observation and prediction "
                                 "count 0.5",
            "median_convention": "midpoint of the two central values on "
                                 "even counts",
            "histogram_truncation": HISTOGRAM_LIMIT,
        },
        "basins_run": basins_run,
        "basins_skipped": skipped,
        "n_parameter_rows": n_param_rows,
    }


def records_frame(records: list[ScoreRecord]) -> pd.DataFrame:
    rows = []
    for rec in records:
        kind, level = _spec_fields(rec.loss)
        rows.append({
            "basin_id": rec.basin_id,
            "model": rec.variant,
            "loss_kind": kind,
            "level": level,
            "period": rec.period,
            "avg_score": rec.avg_score,
            "coverage": rec.coverage,
            "n_days": rec.n_days,
        })
    return pd.DataFrame(rows, columns=SCORE_COLUMNS)


def write_csv(df: pd.DataFrame, path: Path, manifest_hash: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest_hash={manifest_hash}\n")
        df.to_csv(fh, index=False, lineterminator="\n")


def read_csv(path: Path) -> pd.DataFrame:
    # basin ids are opaque strings; keep zero-padded forms intact, and
    # parse floats exactly so artifacts round-trip bit for bit
    return pd.read_csv(path, comment="#", dtype={"basin_id": str},
                       float_precision="round_trip")


@dataclass
class SummaryTables:
    """Across-basin roll-ups of the validation-period scores."""

    relative_scores: pd.DataFrame  # raw, untruncated
    median_relative: pd.DataFrame  # per (model, level) and per model overall
    median_coverage: pd.DataFrame
    histograms: pd.DataFrame  # truncated to +/- HISTOGRAM_LIMIT for display
    n_excluded: int  # degenerate-benchmark cells


def _median(values) -> float:
    return float(np.median(np.asarray(values, dtype=np.float64)))


def summarize(records: list[ScoreRecord], config: ExperimentConfig) -> SummaryTables:
    """Relative scores against the benchmark, medians, and histograms.

    Uses validation-period quantile-loss records only; cells whose
    benchmark score is non-positive are excluded (logged), never
    fabricated.
    """
    quantile_valid = [
        r for r in records
        if r.period == "validation" and r.loss.kind == QUANTILE
    ]
    bench_scores = {
        (r.basin_id, r.loss.level): r.avg_score
        for r in quantile_valid if r.variant == config.benchmark.value
    }
    rel_rows = []
    n_excluded = 0
    for rec in quantile_valid:
        if rec.variant == config.benchmark.value:
            continue
        bench = bench_scores.get((rec.basin_id, rec.loss.level))
        if bench is None:
            continue
        try:
            rel = relative_score(bench, rec.avg_score)
        except BenchmarkDegenerateError:
            logger.warning(
                "excluding %s level %s: degenerate benchmark score %s",
                rec.basin_id, rec.loss.level, bench,
            )
            n_excluded += 1
            continue
        rel_rows.append({
            "model": rec.variant,
            "basin_id": rec.basin_id,
            "level": rec.loss.level,
            "relative_score": rel,
        })
    rel_df = pd.DataFrame(
        rel_rows, columns=["model", "basin_id", "level", "relative_score"]
    )

    median_rows = []
    for model in [v.value for v in config.variants if v != config.benchmark]:
        model_df = rel_df[rel_df["model"] == model]
        for level in config.levels:
            vals = model_df[model_df["level"] == level]["relative_score"]
            if len(vals) == 0:
                continue
            median_rows.append({
                "model": model, "level": f"{level:g}",
                "median_relative_score": _median(vals), "n": len(vals),
            })
        if len(model_df) > 0:
            median_rows.append({
                "model": model, "level": "all",
                "median_relative_score": _median(model_df["relative_score"]),
                "n": len(model_df),
            })
    median_rel_df = pd.DataFrame(
        median_rows, columns=["model", "level", "median_relative_score", "n"]
    )

    coverage_rows = []
    for variant in config.variants:
        for level in config.levels:
            vals = [
                r.coverage for r in quantile_valid
                if r.variant == variant.value and r.loss.level == level
            ]
            if not vals:
                continue
            coverage_rows.append({
                "model": variant.value, "level": f"{level:g}",
                "median_coverage": _median(vals), "n": len(vals),
            })
    coverage_df = pd.DataFrame(
        coverage_rows, columns=["model", "level", "median_coverage", "n"]
    )

    hist_rows = []
    edges = np.linspace(-HISTOGRAM_LIMIT, HISTOGRAM_LIMIT, HISTOGRAM_BINS + 1)
    for model in [v.value for v in config.variants if v != config.benchmark]:
        vals = rel_df[rel_df["model"] == model]["relative_score"].to_numpy()
        if vals.size == 0:
            continue
        clipped = np.clip(vals, -HISTOGRAM_LIMIT, HISTOGRAM_LIMIT)
        counts, _ = np.histogram(clipped, bins=edges)
        for i, count in enumerate(counts):
            hist_rows.append({
                "model": model,
                "bin_lo": edges[i],
                "bin_hi": edges[i + 1],
                "count": int(count),
            })
    hist_df = pd.DataFrame(
        hist_rows, columns=["model", "bin_lo", "bin_hi", "count"]
    )

    return SummaryTables(rel_df, median_rel_df, coverage_df, hist_df, n_excluded)


def write_summary(tables: SummaryTables, out_dir: Path, manifest_hash: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(tables.relative_scores, out_dir / "relative_scores.csv", manifest_hash)
    write_csv(tables.median_relative, out_dir / "median_relative_scores.csv",
              manifest_hash)
    write_csv(tables.median_coverage, out_dir / "median_coverage.csv", manifest_hash)
    write_csv(tables.histograms, out_dir / "histogram_relative_scores.csv",
              manifest_hash)


@dataclass
class LoadedRun:
    run_dir: Path
    config: ExperimentConfig
    manifest: dict
    parameters: pd.DataFrame
    scores: pd.DataFrame


def load_run(run_dir: str | Path) -> LoadedRun:
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"no manifest.json under {run_dir}")
    manifest = json.loads(manifest_path.read_text())
    config = ExperimentConfig.from_dict(manifest["config"])
    return LoadedRun(
        run_dir=run_dir,
        config=config,
        manifest=manifest,
        parameters=read_csv(run_dir / "parameters.csv"),
        scores=read_csv(run_dir / "scores.csv"),
    )


def records_from_frame(df: pd.DataFrame) -> list[ScoreRecord]:
    records = []
    for row in df.itertuples(index=False):
        level = None if pd.isna(row.level) else float(row.level)
        records.append(ScoreRecord(
            basin_id=str(row.basin_id),
            variant=str(row.model),
            loss=LossSpec(str(row.loss_kind), level),
            period=str(row.period),
            avg_score=float(row.avg_score),
            coverage=float(row.coverage),
            n_days=int(row.n_days),
        ))
    return records


def _params_from_row(row) -> ParameterSet:
    variant = ModelVariant(str(row.model))
    values = [getattr(row, name) for name in variant.param_names]
    return ParameterSet.from_values(variant, values)


def hydrograph_frame(
    run: LoadedRun, basin_id: str, window: DateRange,
    variant: ModelVariant,
) -> pd.DataFrame:
    """Observed flow plus each level's simulated quantile over a window."""
    config = run.config
    df = run.parameters
    basin_df = df[(df["basin_id"].astype(str) == basin_id)
                  & (df["model"] == variant.value)]
    if basin_df.empty:
        raise SelectionError(f"no run artifacts for basin {basin_id!r} "
                             f"model {variant.value}")
    if (window.start < config.periods.calibration.start
            or window.end > config.periods.validation.end):
        raise SelectionError(
            f"window {window.start}..{window.end} outside the scored range "
            f"{config.periods.calibration.start}.."
            f"{config.periods.validation.end}"
        )
    meta_map = load_basin_metadata(config.data_dir / METADATA_FILENAME)
    if basin_id not in meta_map:
        raise SelectionError(f"basin {basin_id!r} missing from metadata")
    forcing = load_forcing(config.data_dir, meta_map[basin_id], config.flow_unit)
    obs_view = forcing.view(window)
    out = {"date": obs_view.dates.astype(str), "q_obs": obs_view.q_obs}
    for level in config.levels:
        rows = basin_df[(basin_df["loss_kind"] == QUANTILE)
                        & (basin_df["level"] == level)]
        if rows.empty:
            continue
        params = _params_from_row(next(rows.itertuples(index=False)))
        sim = simulate(variant, params, forcing, config.periods)
        start = int(np.searchsorted(sim.dates, np.datetime64(window.start, "D")))
        end = start + window.n_days
        out[f"q{level:g}"] = sim.q_sim[start:end]
    return pd.DataFrame(out)


def scatter_frame(
    run: LoadedRun, variant: ModelVariant, level: float = 0.5
) -> pd.DataFrame:
    """Validation quantile scores: level-calibrated vs squared-error runs."""
    config = run.config
    spec = LossSpec.quantile(level)
    if level not in config.levels or not config.include_squared_error:
        raise SelectionError(
            f"scatter needs level {level} and the squared-error runs in the "
            "experiment"
        )
    meta_map = load_basin_metadata(config.data_dir / METADATA_FILENAME)
    df = run.parameters
    rows = []
    for basin_id in run.manifest["basins_run"]:
        basin_df = df[(df["basin_id"].astype(str) == basin_id)
                      & (df["model"] == variant.value)]
        q_rows = basin_df[(basin_df["loss_kind"] == QUANTILE)
                          & (basin_df["level"] == level)]
        mse_rows = basin_df[basin_df["loss_kind"] == SQUARED_ERROR]
        if q_rows.empty or mse_rows.empty or basin_id not in meta_map:
            continue
        forcing = load_forcing(config.data_dir, meta_map[basin_id],
                               config.flow_unit)
        _, _, valid_view = split(forcing, config.periods)
        n_calib = config.periods.calibration.n_days
        scores = {}
        for key, params_row in (
            ("quantile_calibrated", next(q_rows.itertuples(index=False))),
            ("squared_error_calibrated", next(mse_rows.itertuples(index=False))),
        ):
            params = _params_from_row(params_row)
            sim = simulate(variant, params, forcing, config.periods)
            scores[key] = average_score(
                sim.q_sim[n_calib:], valid_view.q_obs, spec)
        rows.append({"basin_id": basin_id, **scores})
    if not rows:
        raise SelectionError("no basins with both calibrations present")
    return pd.DataFrame(
        rows,
        columns=["basin_id", "quantile_calibrated", "squared_error_calibrated"],
    )


def emit_plot_data(
    run_dir: str | Path,
    basin_id: str | None = None,
    start: date | None = None,
    end: date | None = None,
    models: list[str] | None = None,
) -> list[Path]:
    """Write plot-ready CSVs (hydrograph window, score scatter, tables).

    Selection errors are raised before anything is written.
    """
    run = load_run(run_dir)
    config = run.config
    manifest_hash = run.manifest["config_hash"]
    try:
        variants = ([ModelVariant(m) for m in models] if models
                    else list(config.variants))
    except ValueError as exc:
        raise SelectionError(str(exc)) from None
    for v in variants:
        if v not in config.variants:
            raise SelectionError(f"model {v.value} was not part of the run")

    outputs: list[tuple[Path, pd.DataFrame]] = []
    plots_dir = run.run_dir / "plots"
    if basin_id is not None:
        if start is None or end is None:
            raise SelectionError("a hydrograph window needs --from and --to")
        try:
            window = DateRange(start, end)
        except DomainError as exc:
            raise SelectionError(str(exc)) from None
        for variant in variants:
            frame = hydrograph_frame(run, basin_id, window, variant)
            outputs.append(
                (plots_dir / f"hydrograph_{basin_id}_{variant.value}.csv", frame)
            )
    if 0.5 in config.levels and config.include_squared_error:
        frame = scatter_frame(run, config.benchmark, 0.5)
        outputs.append(
            (plots_dir / f"scatter_{config.benchmark.value}_q0.5_vs_mse.csv",
             frame)
        )
    tables = summarize(records_from_frame(run.scores), config)
    write_summary(tables, run.run_dir / "summary", manifest_hash)

    written = []
    for path, frame in outputs:
        write_csv(frame, path, manifest_hash)
        written.append(path)
    written.extend(sorted((run.run_dir / "summary").glob("*.csv")))
    return written
