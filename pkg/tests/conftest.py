from __future__ import annotations

import datetime as dt

import numpy as np

from forecast_stability import TimeSeriesDataset

START = dt.date(2020, 1, 1)


def make_panel(values, ids=None) -> TimeSeriesDataset:
    """Build a panel from a nested list / array, ids defaulting to s0, s1, ..."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    if ids is None:
        ids = tuple(f"s{i}" for i in range(values.shape[0]))
    return TimeSeriesDataset(tuple(ids), START, values)
