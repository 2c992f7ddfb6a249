"""CSV emitters for scan results, metric tables and equity curves."""
from __future__ import annotations

import csv
import math
import os
from typing import Iterable, Sequence

import numpy as np

from .backtest import BacktestReport
from .cointegration import PairScan

SCAN_COLUMNS = [
    "pair_a", "pair_b", "lag", "eigen1", "eigen2", "trace_r0", "crit_r0_5pct",
    "trace_r1", "crit_r1_5pct", "rank", "hedge_ratio",
]
METRIC_COLUMNS = [
    "commodity1", "commodity2", "c", "SR", "CAGR", "max_drawdown", "skew", "kurt",
    "n_long", "n_short",
]
SEGMENTS = ("train", "test")


def fmt(value) -> str:
    """Ten significant digits; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".10g")


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _read(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_scan_csv(path, scans: Sequence[PairScan]) -> None:
    rows = []
    for s in scans:
        r = s.result
        if r is None:
            rows.append([s.name_a, s.name_b] + [""] * (len(SCAN_COLUMNS) - 2))
            continue
        # the hedge ratio is stored round-trip exact so later stages reuse it bit-for-bit
        hedge = "" if math.isnan(r.hedge_ratio) else repr(float(r.hedge_ratio))
        rows.append([
            s.name_a, s.name_b, r.lag_order, fmt(r.eigenvalues[0]), fmt(r.eigenvalues[1]),
            fmt(r.trace_statistics[0]), fmt(r.critical_values_5pct[0]),
            fmt(r.trace_statistics[1]), fmt(r.critical_values_5pct[1]), r.rank, hedge,
        ])
    _write(path, SCAN_COLUMNS, rows)


def read_scan_csv(path) -> list[dict]:
    return _read(path)


def cointegrated_rows(scan_rows: Sequence[dict]) -> list[dict]:
    return [r for r in scan_rows if r.get("rank", "") not in ("", "0") and r.get("hedge_ratio", "")]


def metrics_row(name_a: str, name_b: str, report: BacktestReport | None) -> list[str]:
    """One table row; ``None`` gives the zero-trade row with absent c and Sharpe."""
    if report is None:
        return [name_a, name_b, "", "", "0", "0", "0", "0", "0", "0"]
    return [
        name_a, name_b, fmt(report.c), fmt(report.sharpe), fmt(report.cagr),
        fmt(report.max_drawdown), fmt(report.skewness), fmt(report.kurtosis),
        fmt(report.n_long), fmt(report.n_short),
    ]


def metrics_path(out_dir, pair: str, segment: str) -> str:
    return os.path.join(out_dir, f"metrics_{pair}_{segment}.csv")


def write_metrics_csv(path, rows: Sequence[Sequence[str]]) -> None:
    _write(path, METRIC_COLUMNS, rows)


def read_metrics_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[1:]


def combine_metrics(out_dir, pairs: Sequence[str], segment: str) -> tuple[list[list[str]], list[str]]:
    """Per-pair rows in ``pairs`` order, plus the pairs whose file is missing."""
    rows, missing = [], []
    for pair in pairs:
        path = metrics_path(out_dir, pair, segment)
        if not os.path.exists(path):
            missing.append(pair)
            continue
        rows.extend(read_metrics_rows(path))
    return rows, missing


def write_equity_csv(path, dates, equity) -> None:
    _write(path, ["date", "equity"], ([str(d), repr(float(e))] for d, e in zip(dates, equity)))
