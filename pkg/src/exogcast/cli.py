"""``exogcast`` command line: rolling evaluations and data inspection.

Exit status is 0 on success, 1 for invalid configuration or arguments,
2 for data problems and 3 for model failures.
"""
import argparse
import configparser
import hashlib
import io
import logging
import platform
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .data import NATIONAL, load_covid_csv, load_flows_csv, split_point
from .evaluation import (
    EvaluationReport,
    aggregate_states_to_national,
    build_schedule,
    evaluate_panel,
    make_model,
    render_report,
)
from .exceptions import DataError, ExogcastError, ValidationError
from .graph import (
    aggregate_flows,
    binarize_top_fraction,
    full_rank_correct,
    normalize_adjacency,
    write_matrix_csv,
)
from .series import acf

log = logging.getLogger("exogcast")


def build_models(cfg):
    """Display name -> unfitted estimator, in the configured order."""
    models = {}
    for kind in cfg.models:
        if kind in ("SARIMA", "SARIMAX"):
            est = make_model(kind, exog_names=cfg.sarimax_exog, order=cfg.sarimax_order,
                             seasonal_order=cfg.sarimax_seasonal_order, trend=cfg.sarimax_trend)
        elif kind == "MCP":
            est = make_model(kind, exog_names=cfg.mcp_exog, k=cfg.mcp_k, n_screen=cfg.mcp_n_screen,
                             gamma=cfg.mcp_gamma, folds=cfg.mcp_folds,
                             screen_target_lags=cfg.screen_target_lags, h_max=cfg.h_max)
        elif kind == "VAR":
            est = make_model(kind, exog_names=cfg.var_exog, q_max=cfg.var_q_max)
        else:
            est = make_model(kind)
        models[kind] = est
    return models


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    # newline="" keeps output bytes identical across platforms
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _schedule(cfg, n_days):
    if cfg.initial_train is not None:
        initial = cfg.initial_train
    else:
        initial = split_point(n_days, cfg.level if cfg.trim else None)
    return build_schedule(n_days, initial, cfg.step, cfg.h_max)


def _national_actuals(cfg, ds):
    """National series on the state calendar; the state total if none is configured."""
    if cfg.covid_national is None:
        return ds.target.sum(axis=0)
    nat = load_covid_csv(cfg.covid_national, "national", trim=False)
    offset = (ds.start_date - nat.start_date).days
    if offset < 0 or offset + ds.n_days > nat.n_days:
        raise DataError("national file does not cover the state date range")
    return nat.target[0, offset : offset + ds.n_days]


def _forecast_rows(tables):
    lines = ["model,region,window,train_end,horizon,forecast,actual"]
    for (model, region), t in tables.items():
        for w, (end, _) in enumerate(t.schedule.windows):
            for j in range(t.schedule.h_max):
                f = t.forecasts[w, j]
                lines.append(f"{model},{region},{w},{end},{j + 1},{'' if np.isnan(f) else repr(float(f))},"
                             f"{float(t.actuals[w, j])!r}")
    return "\n".join(lines) + "\n"


def _exclusion_rows(tables):
    lines = ["model,region,window,train_end,error"]
    for (model, region), t in tables.items():
        for w, msg in sorted(t.failures.items()):
            msg = msg.replace('"', "'")
            lines.append(f'{model},{region},{w},{t.schedule.windows[w][0]},"{msg}"')
    return "\n".join(lines) + "\n"


def _manifest(cfg, argv, outputs):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    import numba
    import pandas
    import scipy
    import sklearn

    cp["run"] = {
        "exogcast": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pandas.__version__,
        "scikit-learn": sklearn.__version__,
        "numba": numba.__version__,
        "seed": str(cfg.seed),
        "arguments": " ".join(argv or []),
    }
    cp["checksums"] = {}
    for key in ("covid_national", "covid_state", "flows"):
        p = getattr(cfg, key)
        if p is not None:
            cp["checksums"][str(p)] = "sha256:" + _sha256(p)
    cp["outputs"] = {str(p.name): "sha256:" + _sha256(p) for p in outputs}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue() + "# resolved configuration\n" + cfg.to_text()


def run_experiment(cfg, argv=None):
    """Evaluate the configured models and write all artifacts to ``cfg.out``.

    Returns the list of files written.
    """
    cfg.validate()
    np.random.seed(cfg.seed)
    out = Path(cfg.out)
    models = build_models(cfg)
    written = []

    if cfg.level == "national":
        ds = load_covid_csv(cfg.covid_national, "national", trim=cfg.trim).select([NATIONAL])
    else:
        ds = load_covid_csv(cfg.covid_state, "state", trim=cfg.trim)
    schedule = _schedule(cfg, ds.n_days)
    log.info("%s level: %d regions, %d days, %d windows", cfg.level, len(ds.regions), ds.n_days,
             len(schedule))
    tables = evaluate_panel(models, ds, schedule, refit_per_window=cfg.refit_per_window,
                            workers=cfg.workers)

    if cfg.level == "national":
        columns = {m: tables[(m, NATIONAL)].smape_by_horizon() for m in models}
        excluded = {m: len(tables[(m, NATIONAL)].failures) for m in models}
        title = "sMAPE by horizon, national data"
    else:
        actual = _national_actuals(cfg, ds)
        columns, excluded = {}, {}
        for m in models:
            per_state = {r: tables[(m, r)] for r in ds.regions}
            columns[m], excluded[m] = aggregate_states_to_national(
                per_state, actual, schedule, on_missing="exclude_window")
        title = "sMAPE by horizon, state forecasts summed to national"
        for region in cfg.states:
            if region not in ds.regions:
                log.warning("state %s not in the dataset; no per-state report", region)
                continue
            rep = EvaluationReport.from_columns(
                {m: tables[(m, region)].smape_by_horizon() for m in models},
                {m: len(tables[(m, region)].failures) for m in models}, f"sMAPE by horizon, {region}")
            written.append(_write(out / f"report_{region}.csv", render_report(rep)))
            written.append(_write(out / f"report_{region}.txt", render_report(rep, "text")))

    report = EvaluationReport.from_columns(columns, excluded, title)
    written.insert(0, _write(out / "report.csv", render_report(report)))
    written.append(_write(out / "report.txt", render_report(report, "text")))
    for (model, region), t in tables.items():
        if t.params:
            written.append(_write(out / "params" / f"{model}_{region}.txt", t.params))
    written.append(_write(out / "forecasts.csv", _forecast_rows(tables)))
    written.append(_write(out / "exclusions.csv", _exclusion_rows(tables)))
    written.append(_write(out / "manifest.txt", _manifest(cfg, argv, written)))
    return written


def inspect_acf(cfg, region=None, max_lag=30):
    path = cfg.covid_national if cfg.level == "national" else cfg.covid_state
    if path is None:
        raise ValidationError(f"no covid_{cfg.level} data path configured")
    ds = load_covid_csv(path, cfg.level, trim=cfg.trim)
    region = region or (NATIONAL if cfg.level == "national" else ds.regions[0])
    r = acf(ds.series(region).values, max_lag)
    text = "lag,value\n" + "".join(f"{k},{v!r}\n" for k, v in enumerate(r))
    return [_write(Path(cfg.out) / f"acf_{region}.csv", text)]


def inspect_adjacency(cfg):
    if cfg.flows is None:
        raise ValidationError("no flows data path configured")
    records = load_flows_csv(cfg.flows)
    regions = sorted({r.origin for r in records} | {r.destination for r in records})
    flows = aggregate_flows(records, regions)
    binary = binarize_top_fraction(flows, cfg.graph_fraction, cfg.exclude_self_loops)
    corrected = full_rank_correct(binary)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, M in (("binary", binary.matrix), ("corrected", corrected.matrix),
                    ("normalized", normalize_adjacency(corrected))):
        write_matrix_csv(out / f"adjacency_{name}.csv", regions, M)
    n = len(regions)
    summary = (f"regions = {n}\nones = {int(binary.matrix.sum())}\ncells = {n * n}\n"
               f"rank_before = {binary.rank}\nrank_after = {corrected.rank}\n")
    _write(out / "adjacency_summary.txt", summary)
    print(summary, end="")
    return [out / f"adjacency_{k}.csv" for k in ("binary", "corrected", "normalized")]


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment configuration file")
    common.add_argument("--level", choices=("national", "state"))
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="exogcast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"exogcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="rolling evaluation of the configured models")
    run.add_argument("--models", help="comma-separated subset of RW,SARIMA,SARIMAX,MCP,VAR")
    run.add_argument("--workers", type=int, help="parallel worker processes (default: all CPUs)")
    run.add_argument("--seed", type=int)

    insp = sub.add_parser("inspect", help="data diagnostics")
    isub = insp.add_subparsers(dest="what", required=True)
    a = isub.add_parser("acf", parents=[common], help="autocorrelation of the daily target")
    a.add_argument("--region")
    a.add_argument("--max-lag", type=int, default=30)
    isub.add_parser("adjacency", parents=[common], help="binary mobility adjacency before and after correction")
    return parser


def _origin(err):
    for frame in reversed(traceback.extract_tb(err.__traceback__)):
        p = Path(frame.filename)
        if p.parent.name == "exogcast":
            return p.stem
    return "exogcast"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        models = None
        if getattr(args, "models", None) is not None:
            models = tuple(m.strip().upper() for m in args.models.split(",") if m.strip())
        cfg = cfg.with_overrides(level=args.level, out=Path(args.out) if args.out else None,
                                 workers=getattr(args, "workers", None), seed=getattr(args, "seed", None),
                                 models=models)
        if args.command == "run":
            cfg.validate()
            for path in run_experiment(cfg, argv):
                log.info("wrote %s", path)
        elif args.what == "acf":
            cfg.validate(check_paths=False)
            inspect_acf(cfg, args.region, args.max_lag)
        else:
            cfg.validate(check_paths=False)
            inspect_adjacency(cfg)
    except ValidationError as err:
        print(f"exogcast: invalid configuration ({_origin(err)}): {err}", file=sys.stderr)
        return 1
    except DataError as err:
        print(f"exogcast: data error ({_origin(err)}): {err}", file=sys.stderr)
        return 2
    except ExogcastError as err:
        print(f"exogcast: model error ({_origin(err)}): {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
