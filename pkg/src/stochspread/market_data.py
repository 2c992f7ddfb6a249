"""Price CSV ingestion, calendar alignment, gap filling and train/test splitting.

The input CSV has a ``date`` column in ISO-8601 (YYYY-MM-DD) followed by
one column of raw positive spot prices per commodity. Empty cells are
gaps. Prices are converted to natural logs on load, and gaps are filled
by linear interpolation on the log scale, one observation per step.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import (
    BoundaryGapError,
    DateParseError,
    DomainError,
    EmptyInputError,
    InputError,
)


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Dated log-price series for one commodity. NaN marks a gap."""

    commodity_id: str
    dates: np.ndarray
    log_prices: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.log_prices, dtype=float)
        if dates.ndim != 1 or values.shape != dates.shape:
            raise InputError(
                f"{self.commodity_id}: {dates.size} dates but {values.size} prices"
            )
        if dates.size < 2:
            raise InputError(f"{self.commodity_id}: need at least 2 observations, got {dates.size}")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise InputError(f"{self.commodity_id}: dates must be strictly increasing")
        if np.any(np.isinf(values)):
            raise DomainError(f"{self.commodity_id}: infinite log price")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "log_prices", values)

    def __len__(self) -> int:
        return self.dates.size

    @property
    def has_gaps(self) -> bool:
        return bool(np.isnan(self.log_prices).any())

    def slice(self, start: int, stop: int | None = None) -> PriceSeries:
        return PriceSeries(self.commodity_id, self.dates[start:stop], self.log_prices[start:stop])


@dataclass(frozen=True, eq=False)
class PairDataset:
    series_a: PriceSeries
    series_b: PriceSeries
    split_index: int

    def __post_init__(self):
        if not np.array_equal(self.series_a.dates, self.series_b.dates):
            raise InputError("pair series must share an identical date vector")
        if not 0 < self.split_index < len(self.series_a):
            raise DomainError(
                f"split_index must lie in (0, {len(self.series_a)}), got {self.split_index}"
            )

    @property
    def pair_id(self) -> str:
        return pair_id(self.series_a.commodity_id, self.series_b.commodity_id)

    @property
    def dates(self) -> np.ndarray:
        return self.series_a.dates

    def __len__(self) -> int:
        return len(self.series_a)

    def training(self) -> tuple[PriceSeries, PriceSeries]:
        k = self.split_index
        return self.series_a.slice(0, k), self.series_b.slice(0, k)

    def testing(self) -> tuple[PriceSeries, PriceSeries]:
        k = self.split_index
        return self.series_a.slice(k), self.series_b.slice(k)


def pair_id(a: str, b: str) -> str:
    return f"{a}__{b}"


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for :func:`load_csv`. ``price_columns=None`` means all but the date."""

    date_column: str = "date"
    price_columns: tuple[str, ...] | None = None
    rename: dict = field(default_factory=dict)


def load_csv(path: str | os.PathLike, schema: CsvSchema | None = None) -> list[PriceSeries]:
    """Read a wide price CSV into one log-price series per commodity column.

    Rows are sorted by date. Empty cells stay as NaN gaps for
    :func:`interpolate_gaps`.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        EmptyInputError: no header or no data rows.
        DateParseError: a date cell is not ISO-8601; the message names the row.
        DomainError: a price is zero, negative or not a number; names row and column.
    """
    schema = schema or CsvSchema()
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such data file: {path}")
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"{path}: file is empty") from None
    if raw.shape[0] == 0:
        raise EmptyInputError(f"{path}: no data rows")
    if schema.date_column not in raw.columns:
        raise InputError(f"{path}: missing date column {schema.date_column!r}")
    columns = list(schema.price_columns) if schema.price_columns is not None else [
        c for c in raw.columns if c != schema.date_column
    ]
    if not columns:
        raise InputError(f"{path}: no price columns")
    missing = [c for c in columns if c not in raw.columns]
    if missing:
        raise InputError(f"{path}: missing price columns {missing}")

    # file line number of each data row (header is line 1)
    lines = np.arange(raw.shape[0]) + 2
    date_text = raw[schema.date_column].str.strip()
    dates = pd.to_datetime(date_text, format="%Y-%m-%d", errors="coerce")
    bad = dates.isna().to_numpy()
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DateParseError(f"{path}: line {lines[i]}: cannot parse date {date_text.iloc[i]!r}")

    order = np.argsort(dates.to_numpy(), kind="stable")
    day = dates.to_numpy().astype("datetime64[D]")[order]
    if np.any(np.diff(day) == np.timedelta64(0, "D")):
        dup = day[1:][np.diff(day) == np.timedelta64(0, "D")][0]
        raise InputError(f"{path}: duplicate date {dup}")
    lines = lines[order]

    out = []
    for col in columns:
        text = raw[col].str.strip().to_numpy()[order]
        present = text != ""
        prices = np.full(text.shape, np.nan)
        for i in np.flatnonzero(present):
            try:
                value = float(text[i])
            except ValueError:
                raise DomainError(
                    f"{path}: line {lines[i]}, column {col!r}: not a number: {text[i]!r}"
                ) from None
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(
                    f"{path}: line {lines[i]}, column {col!r}: price must be positive, got {text[i]}"
                )
            prices[i] = value
        name = schema.rename.get(col, col)
        out.append(PriceSeries(name, day, np.log(prices)))
    return out


def interpolate_gaps(series: PriceSeries) -> PriceSeries:
    """Fill interior gaps linearly between the nearest observed neighbours.

    Observations are treated as equally spaced (one step per row), and
    values that were present are copied through untouched.
    """
    values = series.log_prices
    gaps = np.isnan(values)
    if not gaps.any():
        return series
    if gaps[0] or gaps[-1]:
        raise BoundaryGapError(
            f"{series.commodity_id}: gap at the {'start' if gaps[0] else 'end'} of the series; trim it first"
        )
    idx = np.arange(values.size, dtype=float)
    filled = values.copy()
    filled[gaps] = np.interp(idx[gaps], idx[~gaps], values[~gaps])
    return PriceSeries(series.commodity_id, series.dates, filled)


def align(series: Sequence[PriceSeries]) -> list[PriceSeries]:
    """Restrict every series to the dates all of them share."""
    if not series:
        return []
    common = series[0].dates
    for s in series[1:]:
        common = np.intersect1d(common, s.dates, assume_unique=True)
    out = []
    for s in series:
        keep = np.isin(s.dates, common)
        out.append(PriceSeries(s.commodity_id, s.dates[keep], s.log_prices[keep]))
    return out


def prepare_universe(series: Sequence[PriceSeries]) -> list[PriceSeries]:
    """Align calendars, trim to the span where every series is observed, then interpolate."""
    aligned = align(series)
    if not aligned:
        return []
    present = np.vstack([~np.isnan(s.log_prices) for s in aligned]).all(axis=0)
    if not present.any():
        raise InputError("no date on which every series is observed")
    first = int(np.argmax(present))
    last = present.size - int(np.argmax(present[::-1]))
    return [interpolate_gaps(s.slice(first, last)) for s in aligned]


def split(
    pair: tuple[PriceSeries, PriceSeries],
    train_fraction: float = 0.8,
    split_index: int | None = None,
) -> PairDataset:
    """Split an aligned pair into training (first ``floor(f*n)`` rows) and testing.

    ``split_index`` overrides the fraction when given.
    """
    a, b = pair
    n = len(a)
    if split_index is None:
        if not 0.0 < train_fraction < 1.0:
            raise DomainError(f"train_fraction must lie in (0, 1), got {train_fraction}")
        split_index = math.floor(train_fraction * n)
    return PairDataset(a, b, int(split_index))
