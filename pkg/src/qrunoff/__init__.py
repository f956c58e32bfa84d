"""Quantile-calibrated daily rainfall-runoff modelling.

Calibrate GR4J-family models directly against the quantile (pinball)
loss so the simulated series is the requested predictive quantile of
streamflow, then evaluate with proper scores, relative scores, coverage
and crossing diagnostics.
"""

__version__ = "0.1.0"

from .calibration import (  # noqa: F401
    CalibOptions,
    CalibrationResult,
    PARAM_BOUNDS,
    calibrate,
    local_search,
    objective,
    screen,
)
from .models import (  # noqa: F401
    ModelState,
    ModelVariant,
    ParameterSet,
    SimulationRun,
    WaterBalance,
    init_state,
    mass_balance,
    run_series,
    simulate,
    step,
    uh_ordinates,
)
from .pet import (  # noqa: F401
    SolarContext,
    extraterrestrial_radiation,
    oudin_pet,
    oudin_pet_series,
)
from .scoring import (  # noqa: F401
    EmpiricalDistribution,
    LossSpec,
    ScoreRecord,
    average_score,
    coverage,
    crossing_rate,
    empirical_quantile,
    pinball_argmin_check,
    quantile_loss,
    relative_score,
)
from .timeseries import (  # noqa: F401
    BasinMeta,
    DateRange,
    ForcingSeries,
    PeriodSplit,
    RawDailyRecord,
    flow_to_mm_per_day,
    load_basin,
    load_basin_metadata,
    make_series,
    mean_daily_temp,
    split,
)
