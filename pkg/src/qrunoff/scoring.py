"""Loss functions, score evaluation, coverage and crossing diagnostics.

The quantile (pinball) loss is the central objective: it is non-negative,
zero only for an exact prediction, and its average over a sample is
minimized by the empirical quantile at the requested level, which is what
makes calibrating a model against it produce that predictive quantile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BenchmarkDegenerateError,
    DomainError,
    EmptyScoreError,
    NumericError,
)

QUANTILE = "quantile"
SQUARED_ERROR = "squared_error"


@dataclass(frozen=True)
class LossSpec:
    """Objective selector: quantile loss at a level, or squared error."""

    kind: str
    level: float | None = None

    def __post_init__(self) -> None:
        if self.kind == QUANTILE:
            if self.level is None or not 0.0 < self.level < 1.0:
                raise DomainError(
                    f"quantile level must be in (0, 1), got {self.level}"
                )
        elif self.kind == SQUARED_ERROR:
            if self.level is not None:
                raise DomainError("squared error takes no level")
        else:
            raise DomainError(f"unknown loss kind {self.kind!r}")

    @classmethod
    def quantile(cls, level: float) -> "LossSpec":
        return cls(QUANTILE, level)

    @classmethod
    def squared_error(cls) -> "LossSpec":
        return cls(SQUARED_ERROR)

    @property
    def label(self) -> str:
        if self.kind == QUANTILE:
            return f"q{self.level:g}"
        return "mse"


@dataclass(frozen=True)
class ScoreRecord:
    """One evaluated (basin, model, loss, period) cell."""

    basin_id: str
    variant: str
    loss: LossSpec
    period: str
    avg_score: float
    coverage: float
    n_days: int


class EmpiricalDistribution:
    """A sample held in non-decreasing order."""

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        values = np.sort(np.asarray(values, dtype=np.float64))
        if values.size == 0:
            raise DomainError("sample must be non-empty")
        if not np.all(np.isfinite(values)):
            raise NumericError("sample must be finite")
        values.setflags(write=False)
        self.values = values

    def __len__(self) -> int:
        return self.values.size


def quantile_loss(r, x, a: float):
    """Pinball loss (r - x) * (1{x <= r} - a); vectorizes over r and x."""
    if not 0.0 < a < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {a}")
    r = np.asarray(r, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(x))):
        raise NumericError("quantile loss requires finite arguments")
    out = (r - x) * ((x <= r) - a)
    return float(out) if out.ndim == 0 else out


def _masked_pair(r, x) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if r.shape != x.shape or r.ndim != 1:
        raise DomainError("prediction and observation series must align")
    if not np.all(np.isfinite(r)):
        raise NumericError("predictions must be finite")
    keep = np.isfinite(x)
    if not keep.any():
        raise EmptyScoreError("no retained days after masking")
    return r[keep], x[keep]


def average_score(r, x, spec: LossSpec) -> float:
    """Mean per-day loss over days with an observation present."""
    r, x = _masked_pair(r, x)
    if spec.kind == QUANTILE:
        return float(np.mean(quantile_loss(r, x, spec.level)))
    return float(np.mean((r - x) ** 2))


def empirical_quantile(dist: EmpiricalDistribution, a: float) -> float:
    """Level-a quantile of the sample: inf{x : F_hat(x) >= a}.

    Equals the ceil(a*n)-th order statistic of the n sample values.
    """
    if not 0.0 < a < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {a}")
    n = len(dist)
    # guard against a*n landing a hair above an integer in floating point
    k = math.ceil(a * n - 1e-9)
    return float(dist.values[max(k, 1) - 1])


def pinball_argmin_check(sample, a: float) -> float:
    """Brute-force constant minimizer of the average quantile loss.

    Scans every sample value, the midpoints between neighbours, and a
    uniform grid across the sample range, so it is independent of the
    order-statistic shortcut it is used to verify.
    """
    dist = EmpiricalDistribution(sample)
    values = dist.values
    if not 0.0 < a < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {a}")
    candidates = [values]
    if values.size > 1:
        candidates.append(0.5 * (values[1:] + values[:-1]))
        lo, hi = values[0], values[-1]
        candidates.append(np.linspace(lo, hi, 257))
    grid = np.unique(np.concatenate(candidates))
    # average loss for every candidate against the whole sample
    losses = np.mean(quantile_loss(grid[:, None], values[None, :], a), axis=1)
    return float(grid[int(np.argmin(losses))])


def relative_score(score_bench: float, score_model: float) -> float:
    """(bench - model) / bench; positive means the model improves."""
    if not score_bench > 0.0:
        raise BenchmarkDegenerateError(
            f"benchmark score must be > 0, got {score_bench}"
        )
    return (score_bench - score_model) / score_bench


def coverage(r, x) -> float:
    """Fraction of observations below the prediction; ties count half."""
    r, x = _masked_pair(r, x)
    below = np.count_nonzero(x < r)
    ties = np.count_nonzero(x == r)
    return (below + 0.5 * ties) / x.size


def crossing_rate(
    q_low, q_high, level_low: float, level_high: float
) -> tuple[float, np.ndarray]:
    """Fraction of days where the lower-level quantile exceeds the higher.

    Returns (rate, indices of violating days). Ties are not crossings.
    """
    if not level_low < level_high:
        raise DomainError(
            f"levels must be ordered, got {level_low} >= {level_high}"
        )
    q_low = np.asarray(q_low, dtype=np.float64)
    q_high = np.asarray(q_high, dtype=np.float64)
    if q_low.shape != q_high.shape or q_low.ndim != 1:
        raise DomainError("quantile series must align")
    violations = np.flatnonzero(q_low > q_high)
    return violations.size / q_low.size, violations
