"""Forecasting daily COVID-19 deaths with exogenous hospitalization data."""

__version__ = "0.1.0"
