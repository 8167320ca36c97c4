"""Experiment configuration read from an INI-style ``key = value`` file.

Example::

    [data]
    covid_national = data/national-history.csv
    covid_state = data/all-states-history.csv
    flows = data/state2state.csv

    [experiment]
    level = national
    models = RW, SARIMAX, SARIMA, MCP, VAR
    seed = 0

    [schedule]
    step = 14
    h_max = 14

Relative paths resolve against the directory of the config file.
"""
import configparser
import io
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .evaluation import HOSPITAL_EXOG, MODEL_KINDS, SARIMAX_EXOG
from .exceptions import ConfigurationError

TABLE_STATES = ("CA", "GA", "IL", "TX", "NY", "PA")


def _split(value):
    return tuple(v.strip() for v in value.replace(";", ",").split(",") if v.strip())


def _ints(value):
    return tuple(int(v) for v in _split(value))


def _bool(value):
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    covid_national: Path = None
    covid_state: Path = None
    flows: Path = None
    level: str = "national"
    models: tuple = MODEL_KINDS
    seed: int = 0
    workers: int = None
    trim: bool = True
    states: tuple = TABLE_STATES
    out: Path = Path("out")
    initial_train: int = None
    step: int = 14
    h_max: int = 14
    refit_per_window: bool = False
    sarimax_order: tuple = (4, 1, 4)
    sarimax_seasonal_order: tuple = (3, 1, 1, 7)
    sarimax_trend: str = "constant"
    sarimax_exog: tuple = SARIMAX_EXOG
    mcp_k: int = 14
    mcp_n_screen: int = 7
    mcp_gamma: float = 3.0
    mcp_folds: int = 5
    mcp_exog: tuple = HOSPITAL_EXOG
    screen_target_lags: bool = True
    var_q_max: int = 14
    var_exog: tuple = HOSPITAL_EXOG
    graph_fraction: float = 0.2
    exclude_self_loops: bool = False

    def validate(self, check_paths=True):
        if not self.models:
            raise ConfigurationError("no models selected")
        unknown = [m for m in self.models if m not in MODEL_KINDS]
        if unknown:
            raise ConfigurationError(f"unknown models: {', '.join(unknown)}")
        if self.level not in ("national", "state"):
            raise ConfigurationError(f"level must be 'national' or 'state', got {self.level!r}")
        if not 1 <= self.h_max <= 14:
            raise ConfigurationError("h_max must lie in 1..14")
        if self.step < 1:
            raise ConfigurationError("step must be positive")
        if self.initial_train is not None and self.initial_train < 1:
            raise ConfigurationError("initial_train must be positive")
        if self.workers is not None and self.workers < 1:
            raise ConfigurationError("workers must be positive")
        if len(self.sarimax_order) != 3 or len(self.sarimax_seasonal_order) != 4:
            raise ConfigurationError("sarimax order needs 3 values and seasonal_order 4")
        if not 0 < self.graph_fraction <= 1:
            raise ConfigurationError("graph fraction must lie in (0, 1]")
        if check_paths:
            needed = self.covid_national if self.level == "national" else self.covid_state
            if needed is None:
                raise ConfigurationError(f"no covid_{self.level} data path configured")
            for p in (self.covid_national, self.covid_state, self.flows):
                if p is not None and not Path(p).exists():
                    raise ConfigurationError(f"data file not found: {p}")
        return self

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def to_text(self):
        """Echo of the resolved configuration in the file format."""
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for section, keys in _LAYOUT.items():
            cp[section] = {}
            for key, attr in keys.items():
                value = getattr(self, attr)
                if isinstance(value, tuple):
                    value = ", ".join(str(v) for v in value)
                cp[section][key] = "" if value is None else str(value)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


# section -> {key in file: dataclass field}
_LAYOUT = {
    "data": {"covid_national": "covid_national", "covid_state": "covid_state", "flows": "flows"},
    "experiment": {"level": "level", "models": "models", "seed": "seed", "workers": "workers",
                   "trim": "trim", "states": "states", "out": "out",
                   "refit_per_window": "refit_per_window"},
    "schedule": {"initial_train": "initial_train", "step": "step", "h_max": "h_max"},
    "sarimax": {"order": "sarimax_order", "seasonal_order": "sarimax_seasonal_order",
                "trend": "sarimax_trend", "exog": "sarimax_exog"},
    "mcp": {"k": "mcp_k", "n_screen": "mcp_n_screen", "gamma": "mcp_gamma", "folds": "mcp_folds",
            "exog": "mcp_exog", "screen_target_lags": "screen_target_lags"},
    "var": {"q_max": "var_q_max", "exog": "var_exog"},
    "graph": {"fraction": "graph_fraction", "exclude_self_loops": "exclude_self_loops"},
}

_PATHS = {"covid_national", "covid_state", "flows", "out"}


def _convert(name, raw, base):
    default = {f.name: f.default for f in fields(ExperimentConfig)}[name]
    raw = raw.strip()
    if name in _PATHS:
        if not raw:
            return None
        p = Path(raw).expanduser()
        return p if p.is_absolute() else base / p
    if name in ("sarimax_order", "sarimax_seasonal_order"):
        return _ints(raw)
    if name in ("models", "states", "sarimax_exog", "mcp_exog", "var_exog"):
        items = _split(raw)
        return tuple(m.upper() for m in items) if name in ("models", "states") else items
    if name in ("initial_train", "workers"):
        return int(raw) if raw else None
    if isinstance(default, bool):
        return _bool(raw)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config(text, base=Path(".")):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigurationError(f"malformed config: {err}") from None
    values, extra = {}, {}
    for section in cp.sections():
        keys = _LAYOUT.get(section, {})
        for key, raw in cp[section].items():
            attr = keys.get(key)
            if attr is None:
                extra[f"{section}.{key}"] = raw
                continue
            try:
                values[attr] = _convert(attr, raw, base)
            except ValueError as err:
                raise ConfigurationError(f"[{section}] {key}: {err}") from None
    if extra:
        raise ConfigurationError(f"unknown config keys: {', '.join(sorted(extra))}")
    return ExperimentConfig(**values)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err.strerror}") from None
    return parse_config(text, path.parent)
