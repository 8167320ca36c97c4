"""Rolling-origin evaluation: schedules, per-window forecasts, sMAPE reports.

Indexing convention: ``train_end`` is the number of observations available
to the model, so a window trains on ``y[:train_end]`` and its horizon-``h``
target is ``y[train_end + h - 1]``. Forecasts with exogenous regressors may
read exogenous actuals up to that target index (retrospective use of
exogenous data, as in the published experiments).
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .baselines import RandomWalkForecaster
from .exceptions import (
    AggregationError,
    ConfigurationError,
    ExogcastError,
    ModelError,
    ScheduleError,
)
from .mcp import MCPForecaster
from .sarimax import SARIMAXForecaster
from .series import smape
from .var import VARForecaster

log = logging.getLogger(__name__)

MODEL_KINDS = ("RW", "SARIMA", "SARIMAX", "MCP", "VAR")
SARIMAX_EXOG = ("hospitalizedCurrently", "inIcuCurrently")
HOSPITAL_EXOG = ("inIcuCurrently", "hospitalizedCurrently", "hospitalizedCumulative",
                 "onVentilatorCurrently")


def make_model(kind, exog_names=None, **params):
    """Estimator for one of the study's model kinds.

    ``exog_names=None`` picks the study's default columns for the kind.
    """
    if kind == "RW":
        return RandomWalkForecaster()
    if kind == "SARIMA":
        return SARIMAXForecaster(exog_names=None, **params)
    if kind == "SARIMAX":
        names = SARIMAX_EXOG if exog_names is None else tuple(exog_names)
        return SARIMAXForecaster(exog_names=names, **params)
    if kind == "MCP":
        names = HOSPITAL_EXOG if exog_names is None else tuple(exog_names)
        return MCPForecaster(exog_names=names, **params)
    if kind == "VAR":
        names = HOSPITAL_EXOG if exog_names is None else tuple(exog_names)
        return VARForecaster(exog_names=names, **params)
    raise ConfigurationError(f"unknown model kind {kind!r}; choose from {', '.join(MODEL_KINDS)}")


# -- schedule ---------------------------------------------------------------------


@dataclass(frozen=True)
class RollingSchedule:
    initial_train_end: int
    step: int
    h_max: int
    windows: tuple

    @property
    def horizons(self):
        return tuple(range(1, self.h_max + 1))

    @property
    def train_ends(self):
        return tuple(w for w, _ in self.windows)

    def __len__(self):
        return len(self.windows)


def build_schedule(series_length, initial_train, step=14, h_max=14):
    """Windows ``train_end = initial_train, +step, ...`` while targets fit."""
    if step < 1 or h_max < 1 or initial_train < 1:
        raise ScheduleError("step, h_max and initial_train must be positive")
    windows = []
    end = initial_train
    while end + h_max <= series_length:
        windows.append((end, tuple(range(end, end + h_max))))
        end += step
    if not windows:
        raise ScheduleError(
            f"no window fits: initial_train={initial_train} + h_max={h_max} > length {series_length}"
        )
    return RollingSchedule(initial_train, step, h_max, tuple(windows))


# -- forecasting over windows -----------------------------------------------------------


@dataclass
class ForecastTable:
    """Forecasts and actuals for one (model, region) over all windows.

    ``forecasts`` and ``actuals`` are ``(n_windows, h_max)``; rows of failed
    windows hold NaN forecasts and their messages are in ``failures``.
    ``params`` is the text dump of the last successfully fitted model.
    """

    model: str
    region: str
    schedule: RollingSchedule
    forecasts: np.ndarray
    actuals: np.ndarray
    failures: dict = field(default_factory=dict)
    params: str = ""

    @property
    def ok(self):
        return ~np.isnan(self.forecasts).any(axis=1)

    def smape_by_horizon(self):
        return pooled_smape(self.forecasts, self.actuals)


def pooled_smape(forecasts, actuals):
    """One sMAPE per horizon over the windows whose forecasts are complete."""
    ok = ~np.isnan(forecasts).any(axis=1)
    if not ok.any():
        return np.full(forecasts.shape[1], np.nan)
    return np.array([smape(forecasts[ok, j], actuals[ok, j]) for j in range(forecasts.shape[1])])


def _exog_names(estimator):
    names = estimator.get_params().get("exog_names")
    return tuple(names) if names else ()


def forecast_windows(estimator, y, X=None, schedule=None, refit_per_window=False, name=None,
                     region=""):
    """Run ``estimator`` over every window of ``schedule``.

    The estimator sees ``y[:train_end]`` and ``X[:train_end]`` when fitting
    and ``X[train_end:train_end + h_max]`` when forecasting. Estimators with an
    ``update`` method are fitted once and then only re-conditioned on the
    growing history, unless ``refit_per_window`` is set. A window whose fit
    or forecast raises a package error is recorded and skipped.
    """
    y = np.asarray(getattr(y, "values", y), dtype=float)
    h_max = schedule.h_max
    n_win = len(schedule)
    out = np.full((n_win, h_max), np.nan)
    actuals = np.array([y[list(targets)] for _, targets in schedule.windows])
    failures = {}
    fitted = None
    params = ""
    for w, (end, _) in enumerate(schedule.windows):
        X_train = None if X is None else X[:end]
        X_future = None if X is None else X[end : end + h_max]
        try:
            if fitted is not None and hasattr(fitted, "update") and not refit_per_window:
                fitted.update(y[:end], X_train)
            else:
                fitted = clone(estimator).fit(y[:end], X_train)
            pred = np.asarray(fitted.predict(h_max, X_future), dtype=float)
            if pred.shape != (h_max,) or not np.all(np.isfinite(pred)):
                raise ModelError(f"forecast has shape {pred.shape} or non-finite values")
            out[w] = pred
            if hasattr(fitted, "report"):
                params = f"train_end = {end}\n" + fitted.report()
        except (ExogcastError, np.linalg.LinAlgError) as err:
            failures[w] = f"{type(err).__name__}: {err}"
            log.warning("%s %s window %d (train_end=%d) excluded: %s", name, region, w, end, err)
            fitted = None
    return ForecastTable(name or type(estimator).__name__, region, schedule, out, actuals, failures,
                         params)


def evaluate_model(model, ds, schedule, region=None, refit_per_window=False, name=None):
    """Per-window forecasts of ``model`` for one region of a panel.

    ``model`` is a kind name (``"RW"``, ``"SARIMA"``, ``"SARIMAX"``, ``"MCP"``,
    ``"VAR"``) or an unfitted estimator with ``fit(y, X)`` and
    ``predict(h, X_future)``. Call :meth:`ForecastTable.smape_by_horizon` on
    the result for the per-horizon scores.
    """
    if isinstance(model, str):
        name = name or model
        model = make_model(model)
    region = ds.regions[0] if region is None else region
    names = _exog_names(model)
    y = ds.series(region).values
    X = ds.exog_matrix(region, names) if names else None
    return forecast_windows(model, y, X, schedule, refit_per_window, name, region)


def _run_unit(args):
    return evaluate_model(*args)


def evaluate_panel(models, ds, schedule, regions=None, refit_per_window=False, workers=1):
    """Forecast tables keyed by ``(model_name, region)``.

    ``models`` maps display names to kinds or estimators. Units run in a
    process pool when ``workers > 1``; results do not depend on the order in
    which units finish.
    """
    regions = ds.regions if regions is None else tuple(regions)
    units = [(est, ds.select([r]), schedule, r, refit_per_window, name)
             for name, est in models.items() for r in regions]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(_run_unit, units))
    else:
        tables = [_run_unit(u) for u in units]
    return {(t.model, t.region): t for t in tables}


def aggregate_states_to_national(per_state, actual_national, schedule=None, on_missing="raise"):
    """Score the sum of state forecasts against a national series.

    ``per_state`` maps region to a ``(n_windows, h_max)`` forecast array (or a
    :class:`ForecastTable`). ``actual_national`` is either the matching
    ``(n_windows, h_max)`` array or a full series indexed like the schedule.
    A NaN or missing state cell raises :class:`AggregationError` unless
    ``on_missing="exclude_window"``, which drops that window instead.
    Returns ``(smape_by_horizon, n_excluded_windows)``.
    """
    if on_missing not in ("raise", "exclude_window"):
        raise ConfigurationError("on_missing must be 'raise' or 'exclude_window'")
    if not per_state:
        raise AggregationError("no state forecasts to aggregate")
    arrays = {r: np.asarray(getattr(f, "forecasts", f), dtype=float) for r, f in per_state.items()}
    shape = next(iter(arrays.values())).shape
    actual = np.asarray(getattr(actual_national, "values", actual_national), dtype=float)
    if actual.ndim == 1:
        if schedule is None:
            raise AggregationError("a schedule is needed to align a national series")
        actual = np.array([actual[list(t)] for _, t in schedule.windows])
    if actual.shape != shape:
        raise AggregationError(f"national actuals {actual.shape} do not match forecasts {shape}")
    total = np.zeros(shape)
    keep = np.ones(shape[0], dtype=bool)
    for region, arr in arrays.items():
        if arr.shape != shape:
            raise AggregationError(f"{region}: forecast table has shape {arr.shape}, expected {shape}")
        bad = np.argwhere(np.isnan(arr))
        if bad.size:
            if on_missing == "raise":
                w, j = bad[0]
                raise AggregationError(f"{region}: no forecast for window {w}, horizon {j + 1}")
            keep[np.unique(bad[:, 0])] = False
        total += np.nan_to_num(arr)
    if not keep.any():
        raise AggregationError("every window is missing at least one state forecast")
    scores = np.array([smape(total[keep, j], actual[keep, j]) for j in range(shape[1])])
    return scores, int((~keep).sum())


# -- reports --------------------------------------------------------------------------


@dataclass
class EvaluationReport:
    """sMAPE by horizon (rows) and model (columns)."""

    models: tuple
    values: np.ndarray
    excluded: dict = field(default_factory=dict)
    title: str = ""

    def __post_init__(self):
        self.models = tuple(self.models)
        values = np.asarray(self.values, dtype=float)
        self.values = values.reshape(-1, len(self.models)) if self.models else np.empty((0, 0))

    @property
    def h_max(self):
        return self.values.shape[0]

    @property
    def average(self):
        if not self.models:
            return np.empty(0)
        return self.values.mean(axis=0)

    def column(self, model):
        return self.values[:, self.models.index(model)]

    @classmethod
    def from_columns(cls, columns, excluded=None, title=""):
        """Build from ``{model: per-horizon vector}`` preserving insertion order."""
        models = tuple(columns)
        if not models:
            return cls((), np.empty((0, 0)), excluded or {}, title)
        values = np.column_stack([np.asarray(columns[m], dtype=float) for m in models])
        return cls(models, values, excluded or {}, title)


def _fmt(v):
    # Python's fixed-point formatting rounds the exact binary value half to even
    return "NA" if np.isnan(v) else f"{v:.2f}"


def _report_rows(report):
    rows = [[str(h)] + [_fmt(v) for v in report.values[h - 1]] for h in range(1, report.h_max + 1)]
    if report.models:
        rows.append(["average"] + [_fmt(v) for v in report.average])
    return rows


def render_report(report, fmt="csv"):
    """Render as CSV or an aligned text table, values to two decimals.

    Rows are horizons ``1 .. h_max`` then ``average``. The text form adds a
    footer with the number of excluded windows per model, if any.
    """
    header = ["horizon", *report.models]
    rows = _report_rows(report)
    if fmt == "csv":
        return "\n".join(",".join(r) for r in [header, *rows]) + "\n"
    if fmt != "text":
        raise ConfigurationError(f"unknown report format {fmt!r}")
    table = [header, *rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = []
    if report.title:
        lines.append(report.title)
    for r in table:
        lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    for model, n in report.excluded.items():
        if n:
            lines.append(f"excluded windows for {model}: {n}")
    return "\n".join(lines) + "\n"
