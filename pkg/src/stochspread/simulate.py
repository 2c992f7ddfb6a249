"""Synthetic data with known ground truth.

Random numbers come from numpy's ``Generator`` over the PCG64 bit
generator seeded with ``SimSpec.seed``; Gaussian draws use
``Generator.standard_normal`` (ziggurat method). Draws are taken in a
fixed order: all state shocks, then all measurement shocks, then the
common-trend steps.
"""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError
from .market_data import PriceSeries
from .spread_model import OUParams, SpreadSeries

DEFAULT_START = "2010-01-01"


@dataclass(frozen=True)
class SimSpec:
    ou: OUParams = field(default_factory=lambda: OUParams(kappa=0.1, mu=2.0, sigma=0.05, v=0.02))
    length: int = 2000
    seed: int = 0
    initial_state: float | None = None
    beta: float = 0.7
    walk_volatility: float = 0.01
    start_level: float = math.log(100.0)

    def __post_init__(self):
        if self.length < 2:
            raise InputError(f"length must be >= 2, got {self.length}")
        if not self.walk_volatility >= 0.0:
            raise InputError(f"walk_volatility must be >= 0, got {self.walk_volatility}")

    @property
    def zeta_start(self) -> float:
        return self.ou.mu if self.initial_state is None else self.initial_state


@dataclass(frozen=True, eq=False)
class SimulatedSpread:
    spread: SpreadSeries
    latent: np.ndarray
    state_shocks: np.ndarray
    measurement_shocks: np.ndarray


@dataclass(frozen=True, eq=False)
class SimulatedPair:
    series_a: PriceSeries
    series_b: PriceSeries
    hedge_ratio: float
    latent: np.ndarray


def business_days(length: int, start: str = DEFAULT_START) -> np.ndarray:
    return np.busday_offset(np.datetime64(start, "D"), np.arange(length), roll="forward")


def _latent_path(spec: SimSpec, rng: np.random.Generator):
    # same map as to_statespace, but a negative mean is allowed here
    x = spec.ou.kappa * spec.ou.mu
    y = 1.0 - spec.ou.kappa
    z = spec.ou.sigma
    eps = rng.standard_normal(spec.length)
    zeta = np.empty(spec.length)
    prev = spec.zeta_start
    for t in range(spec.length):
        prev = x + y * prev + z * eps[t]
        zeta[t] = prev
    return zeta, eps


def simulate_ou_spread(spec: SimSpec) -> SimulatedSpread:
    """Sample ``zeta_t = X + Y zeta_{t-1} + Z eps_t`` and ``s_t = zeta_t + V w_t``.

    ``spec.initial_state`` (default ``mu``) is the state one step before
    the first observation.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    zeta, eps = _latent_path(spec, rng)
    w = rng.standard_normal(spec.length)
    values = zeta + spec.ou.v * w
    return SimulatedSpread(SpreadSeries(business_days(spec.length), values), zeta, eps, w)


def _random_walk(spec: SimSpec, rng: np.random.Generator) -> np.ndarray:
    steps = rng.standard_normal(spec.length)
    steps[0] = 0.0
    return spec.start_level + np.cumsum(spec.walk_volatility * steps)


def simulate_cointegrated_pair(spec: SimSpec, names=("A", "B")) -> SimulatedPair:
    """Pair with ``log P_a - beta * log P_b = zeta_t`` (an OU path) exactly.

    ``log P_a`` is a random walk with step scale ``walk_volatility``; the
    true hedge ratio under ``spread = log P_a + h log P_b`` is ``-beta``.
    """
    if spec.beta == 0.0 or not math.isfinite(spec.beta):
        raise DomainError(f"beta must be finite and non-zero, got {spec.beta}")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    zeta, _ = _latent_path(spec, rng)
    rng.standard_normal(spec.length)  # measurement shocks, unused for pairs
    m = _random_walk(spec, rng)
    dates = business_days(spec.length)
    log_a = m
    log_b = (m - zeta) / spec.beta
    return SimulatedPair(PriceSeries(names[0], dates, log_a), PriceSeries(names[1], dates, log_b),
                         -spec.beta, zeta)


def simulate_random_walk_pair(spec: SimSpec, names=("A", "B")) -> SimulatedPair:
    """Two independent random walks: the no-cointegration null."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    a = _random_walk(spec, rng)
    b = _random_walk(spec, rng)
    dates = business_days(spec.length)
    return SimulatedPair(PriceSeries(names[0], dates, a), PriceSeries(names[1], dates, b),
                         float("nan"), np.full(spec.length, np.nan))


def simulate_universe(
    n_pairs: int,
    n_singles: int,
    spec: SimSpec,
) -> tuple[list[PriceSeries], list[tuple[str, str]]]:
    """``n_pairs`` cointegrated pairs plus ``n_singles`` independent random walks.

    Returns the series (pairs first) and the list of true cointegrated pairs.
    """
    ss = np.random.SeedSequence(spec.seed)
    children = ss.spawn(n_pairs + n_singles)
    series, truth = [], []
    for i in range(n_pairs):
        sub = _with_seed(spec, children[i])
        pair = simulate_cointegrated_pair(sub, names=(f"P{i + 1}A", f"P{i + 1}B"))
        series += [pair.series_a, pair.series_b]
        truth.append((pair.series_a.commodity_id, pair.series_b.commodity_id))
    for j in range(n_singles):
        rng = np.random.Generator(np.random.PCG64(children[n_pairs + j]))
        walk = _random_walk(spec, rng)
        series.append(PriceSeries(f"S{j + 1}", business_days(spec.length), walk))
    return series, truth


def _with_seed(spec: SimSpec, seed_seq: np.random.SeedSequence) -> SimSpec:
    seed = int(seed_seq.generate_state(1, dtype=np.uint64)[0])
    return dataclasses.replace(spec, seed=seed)


def write_price_csv(path, series: list[PriceSeries]) -> None:
    """Write series in the ingestion schema (raw prices, ``date`` first)."""
    if not series:
        raise InputError("nothing to write")
    dates = series[0].dates
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + [s.commodity_id for s in series])
        prices = np.exp(np.vstack([s.log_prices for s in series]))
        for i, d in enumerate(dates):
            w.writerow([str(d)] + [repr(float(p)) for p in prices[:, i]])
