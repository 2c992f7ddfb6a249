"""Threshold trading rule on the spread, entry-multiplier search and metrics.

Rule, with band ``B = c * sigma / sqrt(2 kappa)`` and ``eps = 1e-4``:

* flat  -> short when ``s_t >= mu + B``
* flat  -> long  when ``s_t <= mu - B``
* short -> flat  when ``s_t <= mu + eps * s_t``
* long  -> flat  when ``s_t >= mu - eps * s_t``

One unit of spread at a time, decisions on the day's close, exits before
entries. Daily return is ``position_{t-1} * (s_t - s_{t-1})`` in log-spread
points on a notional of 1, so the equity curve starts at 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, InputError, NoTradeError
from .market_data import PairDataset
from .spread_model import OUParams, SpreadSeries, build_spread

TRADING_DAYS = 252
RISK_FREE_ANNUAL = 0.074
EXIT_EPSILON = 1e-4

LONG = "long_spread"
SHORT = "short_spread"


def default_c_grid(count: int = 200, low: float = 0.01, high: float = 200.0) -> np.ndarray:
    return np.geomspace(low, high, count)


@dataclass(frozen=True)
class TradingRule:
    c: float
    mu: float
    kappa: float
    sigma: float
    exit_epsilon: float = EXIT_EPSILON

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.c, self.mu, self.kappa, self.sigma, self.exit_epsilon)):
            raise DomainError(f"non-finite rule parameter in {self}")
        if self.c < 0.0 or self.kappa <= 0.0 or self.sigma < 0.0:
            raise DomainError(f"need c >= 0, kappa > 0, sigma >= 0; got {self}")
        if not math.isfinite(self.band):
            raise DomainError("entry band is not finite")

    @classmethod
    def from_ou(cls, c: float, ou: OUParams, exit_epsilon: float = EXIT_EPSILON) -> TradingRule:
        return cls(c, ou.mu, ou.kappa, ou.sigma, exit_epsilon)

    @property
    def band(self) -> float:
        return self.c * self.sigma / math.sqrt(2.0 * self.kappa)


@dataclass(frozen=True)
class Trade:
    direction: str
    entry_date: np.datetime64
    exit_date: np.datetime64
    entry_spread: float
    exit_spread: float
    pnl: float
    entry_index: int
    exit_index: int


@dataclass(frozen=True, eq=False)
class RuleRun:
    trades: list
    positions: np.ndarray


@dataclass(frozen=True, eq=False)
class Metrics:
    daily_returns: np.ndarray
    equity_curve: np.ndarray
    sharpe: float | None
    cagr: float
    max_drawdown: float
    skewness: float
    kurtosis: float
    mean_return: float
    std_return: float
    cumulative_return: float
    n_long: int
    n_short: int


@dataclass(frozen=True, eq=False)
class BacktestReport:
    c: float
    daily_returns: np.ndarray
    sharpe: float | None
    cagr: float
    max_drawdown: float
    skewness: float
    kurtosis: float
    n_long: int
    n_short: int
    equity_curve: np.ndarray
    trades: list = field(repr=False)
    dates: np.ndarray = field(repr=False, default=None)
    mean_return: float = 0.0
    std_return: float = 0.0
    cumulative_return: float = 0.0

    @property
    def n_trades(self) -> int:
        return len(self.trades)


def _values(spread) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(spread, SpreadSeries):
        return spread.dates, np.ascontiguousarray(spread.values, dtype=float)
    values = np.ascontiguousarray(spread, dtype=float)
    return np.arange(values.size), values


def trades_from_positions(positions: np.ndarray, spread, cost_per_trade: float = 0.0) -> list[Trade]:
    dates, s = _values(spread)
    prev = np.concatenate([[0], positions[:-1]]).astype(np.int8)
    trades = []
    entry = None
    for t in np.flatnonzero(positions != prev):
        t = int(t)
        if positions[t] != 0:
            entry = t
            continue
        side = int(prev[t])
        gross = (s[t] - s[entry]) if side == 1 else (s[entry] - s[t])
        trades.append(Trade(LONG if side == 1 else SHORT, dates[entry], dates[t],
                            float(s[entry]), float(s[t]), float(gross - cost_per_trade), entry, t))
    return trades


def run_rule(spread, rule: TradingRule, cost_per_trade: float = 0.0) -> RuleRun:
    """Run the threshold state machine; anything open on the last day is closed there."""
    _, s = _values(spread)
    if s.size == 0:
        raise InputError("empty spread")
    pos = _kernels.rule_positions(s, float(rule.mu), float(rule.band), float(rule.exit_epsilon))
    return RuleRun(trades_from_positions(pos, spread, cost_per_trade), pos)


def max_drawdown(equity, relative: bool = False) -> float:
    return float(_kernels.max_drawdown(np.ascontiguousarray(equity, dtype=float), relative))


def _moments(r: np.ndarray) -> tuple[float, float]:
    d = r - r.mean()
    m2 = float(np.mean(d * d))
    if m2 == 0.0:
        return 0.0, 0.0
    # standardise first: m2 ** 1.5 underflows for subnormal variances
    z = d / math.sqrt(m2)
    return float(np.mean(z ** 3)), float(np.mean(z ** 4))


def compute_metrics(
    positions: np.ndarray,
    spread,
    risk_free_annual: float = RISK_FREE_ANNUAL,
    relative_drawdown: bool = False,
    cost_per_trade: float = 0.0,
) -> Metrics:
    """Performance of a daily position series held against ``spread``.

    Sharpe is ``(mean(r) - rf/252) / std(r) * sqrt(252)`` with the sample
    standard deviation, and ``None`` when returns have no variance. CAGR
    is annualised over ``len(r) / 252`` years and reads -100% once equity
    is no longer positive. Kurtosis is the raw fourth standardised moment.
    """
    _, s = _values(spread)
    positions = np.asarray(positions)
    if positions.shape != s.shape:
        raise InputError("positions and spread must be aligned")
    r = positions[:-1].astype(float) * np.diff(s)
    if cost_per_trade:
        prev = np.concatenate([[0], positions[:-1]])
        exits = np.flatnonzero((positions == 0) & (prev != 0))
        r[exits - 1] -= cost_per_trade
    equity = 1.0 + np.concatenate([[0.0], np.cumsum(r)])

    std = float(np.std(r, ddof=1)) if r.size > 1 else 0.0
    mean = float(r.mean()) if r.size else 0.0
    sharpe = None
    if std > 0.0:
        sharpe = (mean - risk_free_annual / TRADING_DAYS) / std * math.sqrt(TRADING_DAYS)
    years = r.size / TRADING_DAYS
    growth = equity[-1] / equity[0]
    if years == 0.0:
        cagr = 0.0
    elif growth <= 0.0:
        cagr = -1.0
    else:
        cagr = growth ** (1.0 / years) - 1.0
    skew, kurt = _moments(r) if r.size else (0.0, 0.0)
    prev = np.concatenate([[0], positions[:-1]])
    entries = positions[(positions != 0) & (prev == 0)]
    return Metrics(r, equity, sharpe, float(cagr), max_drawdown(equity, relative_drawdown), skew, kurt,
                   mean, std, float(equity[-1] - equity[0]),
                   int(np.sum(entries == 1)), int(np.sum(entries == -1)))


def backtest(
    spread,
    rule: TradingRule,
    risk_free_annual: float = RISK_FREE_ANNUAL,
    relative_drawdown: bool = False,
    cost_per_trade: float = 0.0,
) -> BacktestReport:
    run = run_rule(spread, rule, cost_per_trade)
    m = compute_metrics(run.positions, spread, risk_free_annual, relative_drawdown, cost_per_trade)
    dates, _ = _values(spread)
    return BacktestReport(rule.c, m.daily_returns, m.sharpe, m.cagr, m.max_drawdown, m.skewness,
                          m.kurtosis, m.n_long, m.n_short, m.equity_curve, run.trades, dates,
                          m.mean_return, m.std_return, m.cumulative_return)


def optimize_c(
    spread_train,
    ou: OUParams,
    candidate_grid: Sequence[float] | None = None,
    risk_free_annual: float = RISK_FREE_ANNUAL,
    **kwargs,
) -> tuple[float, BacktestReport]:
    """Entry multiplier with the highest in-sample Sharpe; ties go to the smallest c.

    Raises:
        NoTradeError: no candidate produced trades with a defined Sharpe ratio.
    """
    grid = np.sort(np.asarray(default_c_grid() if candidate_grid is None else candidate_grid, dtype=float))
    if grid.size == 0 or np.any(grid < 0.0):
        raise DomainError("candidate grid must be non-empty with c >= 0")
    best = None
    for c in grid:
        rep = backtest(spread_train, TradingRule.from_ou(float(c), ou), risk_free_annual, **kwargs)
        if rep.n_trades == 0 or rep.sharpe is None:
            continue
        if best is None or rep.sharpe > best.sharpe:
            best = rep
    if best is None:
        raise NoTradeError(
            f"no candidate in [{grid[0]:g}, {grid[-1]:g}] produced trades; widen the grid"
        )
    return best.c, best


@dataclass(frozen=True, eq=False)
class PairEvaluation:
    train: BacktestReport
    test: BacktestReport | None
    test_missing: bool = False


def evaluate_pair(
    pair: PairDataset,
    coint,
    fit,
    c: float,
    risk_free_annual: float = RISK_FREE_ANNUAL,
    **kwargs,
) -> PairEvaluation:
    """Backtest both segments with the training hedge ratio, OU fit and ``c``.

    ``coint`` is a cointegration result or a bare hedge ratio; ``fit`` a
    fit result or :class:`OUParams`. A testing segment shorter than two
    observations yields ``test=None`` with ``test_missing`` set.
    """
    hedge_ratio = float(getattr(coint, "hedge_ratio", coint))
    ou = getattr(fit, "ou_params", fit)
    rule = TradingRule.from_ou(c, ou)
    train = backtest(build_spread(pair.training(), hedge_ratio), rule, risk_free_annual, **kwargs)
    if len(pair) - pair.split_index < 2:
        return PairEvaluation(train, None, True)
    test = backtest(build_spread(pair.testing(), hedge_ratio), rule, risk_free_annual, **kwargs)
    return PairEvaluation(train, test)
