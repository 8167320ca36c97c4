"""Synthetic COVID-style panels written in the on-disk CSV layouts."""
import datetime as dt

import numpy as np
import pandas as pd

EXOG = ("hospitalizedCurrently", "inIcuCurrently", "onVentilatorCurrently", "hospitalizedCumulative")


def region_frame(region, start, end, seed, scale=100.0, date_style="iso", blank_days=0):
    """Daily rows with a weekly death pattern driven by lagged hospitalizations."""
    rng = np.random.default_rng(seed)
    days = pd.date_range(start, end, freq="D")
    n = len(days)
    t = np.arange(n)
    wave = 1.0 + 0.6 * np.sin(2 * np.pi * t / 180.0) + 0.3 * np.sin(2 * np.pi * t / 60.0)
    hosp = scale * 20 * wave * np.exp(rng.normal(scale=0.02, size=n))
    icu = 0.3 * hosp * np.exp(rng.normal(scale=0.03, size=n))
    vent = 0.1 * hosp * np.exp(rng.normal(scale=0.05, size=n))
    lagged = np.r_[np.full(10, hosp[0]), hosp[:-10]]
    weekly = 1.0 + 0.25 * np.cos(2 * np.pi * t / 7.0)
    deaths = rng.poisson(0.05 * lagged * weekly)
    if date_style == "compact":
        dates = days.strftime("%Y%m%d")
    else:
        dates = days.strftime("%Y-%m-%d")
    frame = pd.DataFrame({
        "date": dates,
        "region": region,
        "deathIncrease": deaths,
        "hospitalizedCurrently": np.round(hosp),
        "inIcuCurrently": np.round(icu),
        "onVentilatorCurrently": np.round(vent),
        "hospitalizedCumulative": np.round(np.cumsum(hosp) / 10),
    })
    if blank_days:
        frame.loc[: blank_days - 1, list(EXOG)] = np.nan
    return frame


def national_csv(path, start="2020-01-13", end="2021-03-07", seed=0, **kw):
    frame = region_frame("US", start, end, seed, scale=100.0, **kw)
    # newest first, as published
    frame.iloc[::-1].to_csv(path, index=False)
    return path


def state_csv(path, states=("CA", "GA", "IL", "NY", "PA", "TX"), start="2020-01-19",
              end="2021-01-19", seed=0, extra_regions=("PR",)):
    frames = [region_frame(s, start, end, seed + i, scale=5.0 + i) for i, s in enumerate(states)]
    frames += [region_frame(r, start, end, 99, scale=1.0) for r in extra_regions]
    pd.concat(frames).rename(columns={"region": "state"}).to_csv(path, index=False)
    return path


def flows_csv(path, states=("CA", "GA", "IL", "NY", "PA", "TX"), days=3, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for d in range(days):
        date = (dt.date(2020, 3, 2) + dt.timedelta(days=d)).isoformat()
        for o in states:
            for dst in states:
                pop = float(rng.integers(0, 1000))
                rows.append((o, dst, date, pop / 10, pop))
    pd.DataFrame(rows, columns=["origin", "destination", "date", "visitor_flows", "pop_flows"]).to_csv(
        path, index=False)
    return path
