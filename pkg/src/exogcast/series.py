"""Shared time-series primitives: transforms, differencing, ACF and sMAPE."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateSeriesError,
    DimensionError,
    DomainError,
    LengthError,
    ParameterError,
)

WEEK = 7


@dataclass(frozen=True)
class TimeSeries:
    """Daily univariate series anchored at ``start_date``."""

    start_date: dt.date
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise LengthError("TimeSeries needs a non-empty 1-d vector")
        if not np.all(np.isfinite(values)):
            raise DomainError("TimeSeries values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def dates(self):
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self))]

    def shifted(self, offset, values):
        """New series starting ``offset`` days later, with ``values``."""
        return TimeSeries(self.start_date + dt.timedelta(days=offset), values)


def _values(s):
    if isinstance(s, TimeSeries):
        return s.values
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-d series, got shape {arr.shape}")
    return arr


def _like(s, offset, values):
    if isinstance(s, TimeSeries):
        return s.shifted(offset, values)
    return values


def diff_polynomial(d, D, season):
    """Coefficients of (1 - B)^d (1 - B^season)^D, lowest power first."""
    if d < 0 or D < 0:
        raise ParameterError("differencing orders must be non-negative")
    if season < 1:
        raise ParameterError("season must be a positive integer")
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    seasonal = np.zeros(season + 1)
    seasonal[0], seasonal[-1] = 1.0, -1.0
    for _ in range(D):
        poly = np.convolve(poly, seasonal)
    return poly


def difference(s, d=1, D=0, season=WEEK):
    """Apply the regular and seasonal difference operators.

    The output loses ``d + D * season`` leading observations. A
    :class:`TimeSeries` input yields a :class:`TimeSeries` whose start date is
    advanced accordingly; array input yields an array.
    """
    y = _values(s)
    poly = diff_polynomial(d, D, season)
    m = poly.size - 1
    if y.size <= m:
        raise LengthError(
            f"series of length {y.size} too short for d={d}, D={D}, season={season}"
        )
    if m == 0:
        return _like(s, 0, y.copy())
    out = np.zeros(y.size - m)
    for j, c in enumerate(poly):
        if c != 0.0:
            out += c * y[m - j : y.size - j]
    return _like(s, m, out)


def integrate(diffed, initial, d=1, D=0, season=WEEK):
    """Invert :func:`difference` given the ``d + D * season`` initial values.

    Returns the reconstructed series, including the initial values.
    """
    w = _values(diffed)
    poly = diff_polynomial(d, D, season)
    m = poly.size - 1
    init = np.asarray(initial, dtype=float)
    if init.size != m:
        raise LengthError(f"need {m} initial values, got {init.size}")
    y = np.empty(m + w.size)
    y[:m] = init
    for t in range(w.size):
        acc = w[t]
        for j in range(1, m + 1):
            acc -= poly[j] * y[m + t - j]
        y[m + t] = acc
    return y


def weekly_log_return(s, offset=1.0):
    """Week-over-week log growth ``log(y_t + offset) - log(y_{t-7} + offset)``.

    ``offset=1`` is the package-wide convention for count data, since daily
    death counts contain zeros.
    """
    y = _values(s) + offset
    if y.size <= WEEK:
        raise LengthError(f"need more than {WEEK} observations, got {y.size}")
    if np.any(y <= 0):
        raise DomainError("weekly log-return requires y + offset > 0 everywhere")
    logy = np.log(y)
    return _like(s, WEEK, logy[WEEK:] - logy[:-WEEK])


def invert_weekly_log_return(z, anchor, offset=1.0):
    """Rebuild the original series from log-returns and its first 7 values."""
    z = _values(z)
    anchor = np.asarray(anchor, dtype=float)
    if anchor.size != WEEK:
        raise LengthError(f"anchor must hold {WEEK} values, got {anchor.size}")
    logy = np.empty(WEEK + z.size)
    logy[:WEEK] = np.log(anchor + offset)
    for t in range(z.size):
        logy[WEEK + t] = z[t] + logy[t]
    return np.exp(logy) - offset


@dataclass(frozen=True)
class TransformTag:
    """Record of a reversible transform applied to a series.

    ``anchor`` keeps whatever base values the inversion needs (the first week
    for ``weekly_log_return``; empty otherwise).
    """

    kind: str = "identity"
    anchor: np.ndarray = field(default_factory=lambda: np.empty(0))
    offset: float = 1.0

    KINDS = ("identity", "log1p", "weekly_log_return")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown transform {self.kind!r}")

    @classmethod
    def apply(cls, s, kind, offset=1.0):
        """Transform ``s`` and return ``(transformed, tag)``."""
        y = _values(s)
        if kind == "identity":
            return y.copy(), cls(kind)
        if kind == "log1p":
            if np.any(y + offset <= 0):
                raise DomainError("log transform requires y + offset > 0")
            return np.log(y + offset), cls(kind, offset=offset)
        if kind == "weekly_log_return":
            z = weekly_log_return(y, offset=offset)
            return z, cls(kind, anchor=y[:WEEK].copy(), offset=offset)
        raise ParameterError(f"unknown transform {kind!r}")

    def invert(self, transformed):
        x = _values(transformed)
        if self.kind == "identity":
            return x.copy()
        if self.kind == "log1p":
            return np.exp(x) - self.offset
        return invert_weekly_log_return(x, self.anchor, offset=self.offset)


def acf(s, max_lag):
    """Sample autocorrelation at lags ``0..max_lag`` (biased estimator).

    Normalizing every lag by ``n`` keeps the sequence positive semi-definite,
    so all values lie in [-1, 1].
    """
    y = _values(s)
    n = y.size
    if max_lag < 1:
        raise ParameterError("max_lag must be positive")
    if n <= max_lag:
        raise LengthError(f"series of length {n} too short for max_lag={max_lag}")
    x = y - y.mean()
    c0 = np.dot(x, x) / n
    if c0 <= 0.0:
        raise DegenerateSeriesError("autocorrelation undefined for a constant series")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = np.dot(x[k:], x[:-k]) / n / c0
    return out


def smape(forecast, actual):
    """Symmetric MAPE on the 0-200 scale.

    ``100/n * sum(2|F - A| / (|F| + |A|))``; terms with ``F == A == 0`` count
    as zero error.
    """
    f = np.asarray(forecast, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if f.size != a.size:
        raise DimensionError(f"length mismatch: {f.size} forecasts vs {a.size} actuals")
    if f.size == 0:
        raise DimensionError("sMAPE needs at least one pair")
    denom = np.abs(f) + np.abs(a)
    num = 2.0 * np.abs(f - a)
    terms = np.divide(num, denom, out=np.zeros_like(num), where=denom > 0)
    return 100.0 * terms.mean()
