"""Latent Ornstein-Uhlenbeck spread model in state-space form.

Continuous model: ``d zeta = kappa (mu - zeta) dt + sigma dB`` observed as
``s_t = zeta_t + V w_t``. With one-day steps the transition is

    zeta_t = X + Y zeta_{t-1} + Z eps_t,   X = kappa*mu, Y = 1 - kappa, Z = sigma

and the inverse map is ``kappa = 1 - Y``, ``mu = X / kappa``, ``sigma = Z``.
The intercept is ``kappa*mu`` (not ``mu/kappa``): only that form inverts
to ``mu = X / kappa`` and matches the Euler step of the SDE.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractError, DomainError, InputError, NumericalError
from .market_data import PairDataset, PriceSeries

# Y closer than this to 1 counts as a unit root for the initial variance
UNIT_ROOT_MARGIN = 1e-6


@dataclass(frozen=True)
class OUParams:
    kappa: float
    mu: float
    sigma: float
    v: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(t) for t in (self.kappa, self.mu, self.sigma, self.v)):
            raise DomainError(f"non-finite OU parameter in {self}")
        if not 0.0 < self.kappa < 1.0:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.sigma < 0.0 or self.v < 0.0:
            raise DomainError(f"sigma and v must be >= 0, got {self.sigma}, {self.v}")

    @property
    def stationary_std(self) -> float:
        """sigma / sqrt(2 kappa), the width unit of the trading band."""
        return self.sigma / math.sqrt(2.0 * self.kappa)


@dataclass(frozen=True)
class StateSpaceParams:
    x: float
    y: float
    z: float
    v: float

    def __post_init__(self):
        if not all(math.isfinite(t) for t in (self.x, self.y, self.z, self.v)):
            raise DomainError(f"non-finite state-space parameter in {self}")
        if self.x < 0.0:
            raise DomainError(f"X must be >= 0, got {self.x}")
        if not 0.0 < self.y < 1.0:
            raise DomainError(f"Y must lie in (0, 1), got {self.y}")
        if self.z < 0.0 or self.v < 0.0:
            raise DomainError(f"Z and V must be >= 0, got {self.z}, {self.v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.v])


@dataclass(frozen=True, eq=False)
class SpreadSeries:
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise InputError("spread dates and values must be 1-D and equally long")
        if dates.size and np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise InputError("spread dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def slice(self, start: int, stop: int | None = None) -> SpreadSeries:
        return SpreadSeries(self.dates[start:stop], self.values[start:stop])

    @classmethod
    def from_values(cls, values, start: str = "2000-01-03") -> SpreadSeries:
        """Spread on consecutive business days, for synthetic data."""
        values = np.asarray(values, dtype=float)
        dates = np.busday_offset(np.datetime64(start, "D"), np.arange(values.size), roll="forward")
        return cls(dates, values)


@dataclass(frozen=True, eq=False)
class KalmanOutput:
    filtered_means: np.ndarray
    filtered_variances: np.ndarray
    smoothed_means: np.ndarray
    smoothed_variances: np.ndarray
    log_likelihood: float
    predicted_means: np.ndarray
    predicted_variances: np.ndarray


@dataclass(frozen=True)
class HalfLife:
    days: float
    inverse_kappa_days: float


def build_spread(pair, hedge_ratio: float) -> SpreadSeries:
    """``log P_a + hedge_ratio * log P_b`` over the pair's dates.

    ``pair`` is a :class:`PairDataset` (whole sample) or a tuple of two
    aligned :class:`PriceSeries`.
    """
    if not math.isfinite(hedge_ratio):
        raise DomainError(f"hedge ratio must be finite, got {hedge_ratio}")
    if isinstance(pair, PairDataset):
        a, b = pair.series_a, pair.series_b
    else:
        a, b = pair
    if not isinstance(a, PriceSeries) or not np.array_equal(a.dates, b.dates):
        raise InputError("build_spread needs two aligned PriceSeries")
    return SpreadSeries(a.dates, a.log_prices + hedge_ratio * b.log_prices)


def to_statespace(params: OUParams) -> StateSpaceParams:
    try:
        return StateSpaceParams(params.kappa * params.mu, 1.0 - params.kappa, params.sigma, params.v)
    except DomainError as exc:
        raise ContractError(f"{params} has no valid state-space image: {exc}") from None


def from_statespace(params: StateSpaceParams) -> OUParams:
    kappa = 1.0 - params.y
    if not kappa > 0.0:
        raise DomainError(f"Y = {params.y} gives non-positive kappa")
    return OUParams(kappa, params.x / kappa, params.z, params.v)


def half_life(params: OUParams) -> HalfLife:
    """OU half-life ``ln 2 / kappa`` alongside the ``1 / kappa`` reading."""
    return HalfLife(math.log(2.0) / params.kappa, 1.0 / params.kappa)


def initial_state(values: np.ndarray, y: float, z: float) -> tuple[float, float]:
    """Prior mean and variance of the first latent state.

    The mean is the first observation; the variance is the stationary
    ``Z^2 / (1 - Y^2)``, or ten times the sample variance near a unit root.
    """
    if 1.0 - y < UNIT_ROOT_MARGIN:
        return float(values[0]), 10.0 * _sample_var(values)
    return float(values[0]), z * z / (1.0 - y * y)


def _sample_var(values: np.ndarray) -> float:
    return float(np.var(values, ddof=1)) if values.size > 1 else 0.0


def _spread_values(spread) -> np.ndarray:
    values = spread.values if isinstance(spread, SpreadSeries) else np.asarray(spread, dtype=float)
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise InputError("spread must be one-dimensional with at least 2 observations")
    if not np.all(np.isfinite(values)):
        raise InputError("spread contains non-finite values")
    return values


def kalman_filter(spread, params: StateSpaceParams, smooth: bool = True) -> KalmanOutput:
    """Filter, optionally smooth, and score ``spread`` under ``params``.

    Raises:
        InputError: Z and V are both zero.
        NumericalError: a one-step predictive variance collapsed to zero.
    """
    s = _spread_values(spread)
    if params.z == 0.0 and params.v == 0.0:
        raise InputError("Z and V cannot both be zero")
    m0, p0 = initial_state(s, params.y, params.z)
    fm, fv, pm, pv, loglik, status = _kernels.kalman_filter(
        s, params.x, params.y, params.z, params.v, m0, p0
    )
    if status:
        raise NumericalError(f"zero predictive variance at step {status - 1}")
    if smooth:
        sm, sv = _kernels.rts_smoother(fm, fv, pm, pv, params.y)
    else:
        sm = np.full_like(fm, np.nan)
        sv = np.full_like(fv, np.nan)
    return KalmanOutput(fm, fv, sm, sv, float(loglik), pm, pv)


def log_likelihood_batch(spread, population: np.ndarray) -> np.ndarray:
    """Log-likelihood for each row ``(X, Y, Z, V)``; NaN where the filter degenerates."""
    s = _spread_values(spread)
    population = np.ascontiguousarray(np.atleast_2d(population), dtype=float)
    return _kernels.loglik_batch(s, population, float(s[0]), 10.0 * _sample_var(s))


def write_state_csv(path: str | os.PathLike, spread: SpreadSeries, out: KalmanOutput) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "spread", "filtered_mean", "filtered_var", "smoothed_mean", "smoothed_var"])
        for row in zip(spread.dates, spread.values, out.filtered_means, out.filtered_variances,
                       out.smoothed_means, out.smoothed_variances):
            w.writerow([str(row[0])] + [repr(float(v)) for v in row[1:]])
