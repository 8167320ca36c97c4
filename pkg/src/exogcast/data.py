"""Loading and cleaning of daily COVID panels and state-to-state flow files."""
import datetime as dt
import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .exceptions import ConfigurationError, DataError, SchemaError
from .series import TimeSeries

log = logging.getLogger(__name__)

TARGET = "deathIncrease"
EXOGENOUS = ("hospitalizedCurrently", "inIcuCurrently", "onVentilatorCurrently",
             "hospitalizedCumulative")
NATIONAL = "US"

# 50 states plus DC, keyed by two-digit FIPS code
STATE_FIPS = {
    "01": "AL", "02": "AK", "04": "AZ", "05": "AR", "06": "CA", "08": "CO", "09": "CT",
    "10": "DE", "11": "DC", "12": "FL", "13": "GA", "15": "HI", "16": "ID", "17": "IL",
    "18": "IN", "19": "IA", "20": "KS", "21": "KY", "22": "LA", "23": "ME", "24": "MD",
    "25": "MA", "26": "MI", "27": "MN", "28": "MS", "29": "MO", "30": "MT", "31": "NE",
    "32": "NV", "33": "NH", "34": "NJ", "35": "NM", "36": "NY", "37": "NC", "38": "ND",
    "39": "OH", "40": "OK", "41": "OR", "42": "PA", "44": "RI", "45": "SC", "46": "SD",
    "47": "TN", "48": "TX", "49": "UT", "50": "VT", "51": "VA", "53": "WA", "54": "WV",
    "55": "WI", "56": "WY",
}
STATES = tuple(sorted(STATE_FIPS.values()))

# study windows: (first day, number of days)
WINDOWS = {
    "national": (dt.date(2020, 2, 26), 376),
    "state": (dt.date(2020, 3, 29), 297),
}
# initial training length for each study window
SPLITS = {"national": 236, "state": 185}


class DataWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RawCovidRow:
    date: dt.date
    region: str
    deathIncrease: int
    hospitalizedCurrently: int = None
    inIcuCurrently: int = None
    onVentilatorCurrently: int = None
    hospitalizedCumulative: int = None


@dataclass(frozen=True)
class FlowRecord:
    origin: str
    destination: str
    date: dt.date
    visitor_flows: float
    pop_flows: float


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Regions x days panel of the target and exogenous counts.

    ``target`` has shape ``(n_regions, n_days)``; ``exogenous`` maps a column
    name to an array of the same shape.
    """

    regions: tuple
    start_date: dt.date
    target: np.ndarray
    exogenous: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target.shape[0] != len(self.regions):
            raise DataError("target rows do not match the region list")
        for name, arr in self.exogenous.items():
            if arr.shape != self.target.shape:
                raise DataError(f"exogenous column {name} is not aligned with the target")

    @property
    def n_days(self):
        return self.target.shape[1]

    def __len__(self):
        return self.n_days

    @property
    def calendar(self):
        return tuple(self.start_date + dt.timedelta(days=i) for i in range(self.n_days))

    @property
    def exog_names(self):
        return tuple(self.exogenous)

    def _row(self, region):
        try:
            return self.regions.index(region)
        except ValueError:
            raise DataError(f"region {region!r} not in dataset") from None

    def series(self, region):
        return TimeSeries(self.start_date, self.target[self._row(region)])

    def exog_matrix(self, region, names=None):
        """``(n_days, k)`` matrix of the named exogenous columns for one region."""
        names = self.exog_names if names is None else tuple(names)
        missing = [n for n in names if n not in self.exogenous]
        if missing:
            raise SchemaError(f"exogenous columns not in dataset: {', '.join(missing)}")
        i = self._row(region)
        return np.column_stack([self.exogenous[n][i] for n in names]) if names else np.empty((self.n_days, 0))

    def slice_days(self, start, stop):
        return replace(
            self,
            start_date=self.start_date + dt.timedelta(days=start),
            target=self.target[:, start:stop],
            exogenous={k: v[:, start:stop] for k, v in self.exogenous.items()},
        )

    def select(self, regions):
        rows = [self._row(r) for r in regions]
        return replace(self, regions=tuple(regions), target=self.target[rows],
                       exogenous={k: v[rows] for k, v in self.exogenous.items()})

    def equals(self, other):
        return (
            self.regions == other.regions
            and self.start_date == other.start_date
            and np.array_equal(self.target, other.target)
            and self.exogenous.keys() == other.exogenous.keys()
            and all(np.array_equal(v, other.exogenous[k]) for k, v in self.exogenous.items())
        )


def parse_date(value):
    s = str(value).strip()
    try:
        if len(s) == 8 and s.isdigit():
            return dt.datetime.strptime(s, "%Y%m%d").date()
        return dt.date.fromisoformat(s[:10])
    except ValueError:
        raise DataError(f"unparseable date {s!r}") from None


def _region_code(value):
    s = str(value).strip()
    if s.isdigit():
        return STATE_FIPS.get(s.zfill(2), s)
    return s.upper()


def _read(path):
    try:
        # round_trip keeps written floats bit-exact
        return pd.read_csv(path, dtype=str, keep_default_na=True, float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None


def load_covid_csv(path, level="national", trim=True, exog_columns=EXOGENOUS):
    """Read a daily COVID CSV into a cleaned :class:`PanelDataset`.

    The region comes from a ``region`` or ``state`` column; national files may
    omit it. At state level only the 50 states and DC are kept. With ``trim``
    the study window for ``level`` is cut out; otherwise the dataset spans
    the first to the last date present. Negative target values are clamped to
    zero, empty target cells read as zero, and missing exogenous values are
    forward- then back-filled (all-missing columns become zero).
    """
    if level not in WINDOWS:
        raise ConfigurationError(f"level must be one of {sorted(WINDOWS)}")
    df = _read(path)
    if "date" not in df.columns:
        raise SchemaError(f"{path}: missing 'date' column")
    if TARGET not in df.columns:
        raise SchemaError(f"{path}: missing target column {TARGET!r}")
    region_col = next((c for c in ("region", "state") if c in df.columns), None)
    if region_col is None:
        if level == "state":
            raise SchemaError(f"{path}: state files need a 'region' or 'state' column")
        df["region"], region_col = NATIONAL, "region"
    df["_date"] = [parse_date(v) for v in df["date"]]
    df["_region"] = [_region_code(v) for v in df[region_col]]
    if level == "national":
        df = df[df["_region"] == NATIONAL]
    else:
        df = df[df["_region"].isin(STATES)]
    if df.empty:
        raise DataError(f"{path}: no rows for level {level!r}")
    dup = df.duplicated(["_region", "_date"], keep="first")
    if dup.any():
        row = df[dup].iloc[0]
        raise DataError(f"{path}: duplicate row for {row['_region']} on {row['_date'].isoformat()}")

    if trim:
        first, n_days = WINDOWS[level]
    else:
        first = df["_date"].min()
        n_days = (df["_date"].max() - first).days + 1
    calendar = [first + dt.timedelta(days=i) for i in range(n_days)]
    regions = tuple(sorted(df["_region"].unique()))
    exog_columns = [c for c in exog_columns if c in df.columns]

    target = np.zeros((len(regions), n_days))
    exog = {c: np.zeros((len(regions), n_days)) for c in exog_columns}
    for i, (region, grp) in enumerate(df.groupby("_region", sort=True)):
        grp = grp.set_index("_date").sort_index()
        missing = [d for d in calendar if d not in grp.index]
        if missing:
            raise DataError(f"{path}: {region} has no row for {missing[0].isoformat()}")
        grp = grp.loc[calendar]
        y = pd.to_numeric(grp[TARGET], errors="coerce").to_numpy(dtype=float)
        if np.isnan(y).any():
            log.warning("%s: %d empty %s cells read as 0", region, np.isnan(y).sum(), TARGET)
            y = np.nan_to_num(y, nan=0.0)
        if (y < 0).any():
            msg = f"{region}: {(y < 0).sum()} negative {TARGET} values clamped to 0"
            log.warning(msg)
            warnings.warn(msg, DataWarning, stacklevel=2)
            y = np.maximum(y, 0.0)
        target[i] = y
        for c in exog_columns:
            x = pd.to_numeric(grp[c], errors="coerce").ffill().bfill().fillna(0.0)
            exog[c][i] = np.maximum(x.to_numpy(dtype=float), 0.0)
    return PanelDataset(regions, calendar[0], target, exog)


def write_panel_csv(ds, path):
    """Write a panel in the long format read by :func:`load_covid_csv`."""
    rows = []
    for i, region in enumerate(ds.regions):
        for t, day in enumerate(ds.calendar):
            row = {"date": day.isoformat(), "region": region, TARGET: repr(float(ds.target[i, t]))}
            for name, arr in ds.exogenous.items():
                row[name] = repr(float(arr[i, t]))
            rows.append(row)
    pd.DataFrame(rows, columns=["date", "region", TARGET, *ds.exogenous]).to_csv(path, index=False)


def load_flows_csv(path, return_dropped=False):
    """Read ``origin,destination,date,visitor_flows,pop_flows`` rows.

    Region codes may be postal codes or two-digit FIPS codes. Rows naming
    anything other than a state or DC are dropped and counted.
    """
    df = _read(path)
    need = ["origin", "destination", "date", "visitor_flows", "pop_flows"]
    missing = [c for c in need if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
    valid = set(STATES)
    records, dropped = [], 0
    for line, row in enumerate(df.itertuples(index=False), start=2):
        visitors, pop = float(row.visitor_flows), float(row.pop_flows)
        if not (visitors >= 0 and pop >= 0):
            raise DataError(f"{path}: line {line}: negative or missing flow value")
        o, d = _region_code(row.origin), _region_code(row.destination)
        if o not in valid or d not in valid:
            dropped += 1
            continue
        records.append(FlowRecord(o, d, parse_date(row.date), visitors, pop))
    if dropped:
        msg = f"{path}: dropped {dropped} flow rows with unknown region codes"
        log.warning(msg)
        warnings.warn(msg, DataWarning, stacklevel=2)
    return (records, dropped) if return_dropped else records


def split_point(n_days, level=None, fraction=0.6):
    """Initial training length for a dataset of ``n_days``."""
    if level is None:
        if not 0 < fraction < 1:
            raise ConfigurationError("fraction must lie in (0, 1)")
        return math.floor(round(fraction * n_days, 9))
    if level not in WINDOWS:
        raise ConfigurationError(f"level must be one of {sorted(WINDOWS)}")
    expected = WINDOWS[level][1]
    if n_days != expected:
        raise ConfigurationError(
            f"{level} split expects {expected} days, dataset has {n_days}; use the fraction rule instead"
        )
    return SPLITS[level]


def train_test_split(ds, level=None, fraction=0.6):
    """Split into leading training days and the remaining test days.

    ``level`` selects the fixed study split; without it the first
    ``floor(fraction * n_days)`` days train.
    """
    cut = split_point(ds.n_days, level, fraction)
    return ds.slice_days(0, cut), ds.slice_days(cut, ds.n_days)
