"""VECM estimation, Johansen trace test and pairwise cointegration scan.

The VECM for a pair of log-price series ``y_t`` is

    dy_t = mu + A y_{t-1} + sum_{i=1}^{p-1} G_i dy_{t-i} + w_t

with an unrestricted constant ``mu``. The hedge ratio follows the
convention ``spread_t = log P_a(t) + hedge_ratio * log P_b(t)``, i.e. the
dominant cointegration vector normalised to ``(1, hedge_ratio)``.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateInputError, DegenerateVectorError, InputError, NumericalError
from .market_data import PriceSeries

logger = logging.getLogger(__name__)

# 5% trace-test critical values, two variables, unrestricted constant
# (MacKinnon response-surface values as tabulated in LeSage's Econometrics
# Toolbox c_sjt, p=0). Index r holds the value for H0: rank <= r.
TRACE_CRIT_5PCT = (15.4943, 3.8415)

DEFAULT_MAX_LAG = 10


@dataclass(frozen=True, eq=False)
class VecmFit:
    lag_order: int
    coefficient_matrix_A: np.ndarray
    gamma_matrices: list
    drift: np.ndarray
    residuals: np.ndarray
    levels: np.ndarray

    @property
    def nobs(self) -> int:
        return self.residuals.shape[0]


@dataclass(frozen=True, eq=False)
class CointegrationResult:
    eigenvalues: np.ndarray
    trace_statistics: np.ndarray
    critical_values_5pct: np.ndarray
    rank: int
    hedge_ratio: float
    cointegration_vector: np.ndarray
    lag_order: int
    nobs: int

    @property
    def cointegrated(self) -> bool:
        return self.rank >= 1


def _as_levels(pair_logs) -> np.ndarray:
    if isinstance(pair_logs, np.ndarray) and pair_logs.ndim == 2:
        y = np.asarray(pair_logs, dtype=float)
    else:
        a, b = pair_logs
        a = a.log_prices if isinstance(a, PriceSeries) else a
        b = b.log_prices if isinstance(b, PriceSeries) else b
        y = np.column_stack([np.asarray(a, dtype=float), np.asarray(b, dtype=float)])
    if y.ndim != 2 or y.shape[1] != 2:
        raise InputError(f"expected two aligned series, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputError("series contain gaps or non-finite values")
    return y


def _design(y: np.ndarray, lag_order: int):
    """Regressand dy_t, levels y_{t-1} and short-run block [1, dy_{t-1..t-p+1}]."""
    T = y.shape[0]
    p = lag_order
    dy = np.diff(y, axis=0)
    rows = T - p
    z0 = dy[p - 1:]
    z1 = y[p - 1:T - 1]
    blocks = [np.ones((rows, 1))]
    for i in range(1, p):
        blocks.append(dy[p - 1 - i:T - 1 - i])
    z2 = np.hstack(blocks)
    return z0, z1, z2


def fit_vecm(pair_logs, lag_order: int) -> VecmFit:
    """Least-squares VECM with ``lag_order - 1`` lagged differences.

    Raises:
        DegenerateInputError: the regressor matrix is rank deficient.
    """
    y = _as_levels(pair_logs)
    if lag_order < 1:
        raise InputError(f"lag_order must be >= 1, got {lag_order}")
    if y.shape[0] <= lag_order + 2:
        raise InputError(f"series length {y.shape[0]} too short for lag order {lag_order}")
    z0, z1, z2 = _design(y, lag_order)
    X = np.hstack([z2[:, :1], z1, z2[:, 1:]])
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DegenerateInputError("singular VECM regressors (constant or collinear series?)")
    coef, *_ = np.linalg.lstsq(X, z0, rcond=None)
    resid = z0 - X @ coef
    drift = coef[0]
    A = coef[1:3].T
    gammas = [coef[3 + 2 * i:5 + 2 * i].T for i in range(lag_order - 1)]
    return VecmFit(lag_order, A, gammas, drift, resid, y)


def johansen_test(vecm: VecmFit) -> CointegrationResult:
    """Johansen trace test for the rank of the long-run matrix of ``vecm``.

    Concentrates out the constant and short-run terms, solves
    ``S10 S00^-1 S01 v = lambda S11 v`` and compares the trace statistics
    with the embedded 5% critical values sequentially.
    """
    z0, z1, z2 = _design(vecm.levels, vecm.lag_order)
    proj, *_ = np.linalg.lstsq(z2, np.hstack([z0, z1]), rcond=None)
    r = np.hstack([z0, z1]) - z2 @ proj
    r0, r1 = r[:, :2], r[:, 2:]
    T = r.shape[0]
    s00 = r0.T @ r0 / T
    s11 = r1.T @ r1 / T
    s01 = r0.T @ r1 / T
    try:
        lhs = s01.T @ np.linalg.solve(s00, s01)
        lam, vec = scipy.linalg.eigh((lhs + lhs.T) / 2.0, s11)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DegenerateInputError(f"singular product-moment matrices: {exc}") from None
    if not np.all(np.isfinite(lam)):
        raise NumericalError("non-finite Johansen eigenvalues")
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, None)
    vec = vec[:, order]
    if lam[0] >= 1.0:
        raise NumericalError(f"Johansen eigenvalue {lam[0]} outside [0, 1)")

    log_terms = np.log1p(-lam)
    trace = -T * np.cumsum(log_terms[::-1])[::-1]
    crit = np.asarray(TRACE_CRIT_5PCT)
    rank = 0
    while rank < 2 and trace[rank] > crit[rank]:
        rank += 1

    a, b = vec[:, 0]
    if abs(a) <= 1e-12 * max(abs(b), 1e-300):
        if rank >= 1:
            raise DegenerateVectorError("dominant eigenvector has a zero first component")
        hedge, vector = float("nan"), np.array([np.nan, np.nan])
    else:
        vector = np.array([1.0, b / a])
        hedge = float(b / a) if rank >= 1 else float("nan")
    return CointegrationResult(lam, trace, crit, rank, hedge, vector, vecm.lag_order, T)


def select_lag(pair_logs, max_lag: int = DEFAULT_MAX_LAG) -> int:
    """VAR lag order in ``[1, max_lag]`` minimising BIC on a common sample.

    Ties go to the smaller lag.
    """
    y = _as_levels(pair_logs)
    if max_lag < 1:
        raise InputError(f"max_lag must be >= 1, got {max_lag}")
    T = y.shape[0]
    if T <= max_lag + 2:
        raise InputError(f"series length {T} too short for max_lag {max_lag}")
    if max_lag == 1:
        return 1
    n = T - max_lag
    target = y[max_lag:]
    best_lag, best_bic = 1, np.inf
    for p in range(1, max_lag + 1):
        X = np.hstack([np.ones((n, 1))] + [y[max_lag - i:T - i] for i in range(1, p + 1)])
        coef, *_ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ coef
        sign, logdet = np.linalg.slogdet(resid.T @ resid / n)
        if sign <= 0:
            continue
        bic = logdet + np.log(n) / n * (2 * X.shape[1])
        if bic < best_bic:
            best_lag, best_bic = p, bic
    return best_lag


@dataclass(frozen=True)
class PairScan:
    """One tested pair: either a result or the error that stopped it."""

    name_a: str
    name_b: str
    result: CointegrationResult | None = None
    error: str | None = None

    @property
    def cointegrated(self) -> bool:
        return self.result is not None and self.result.cointegrated


def johansen_pair(a: PriceSeries, b: PriceSeries, max_lag: int = DEFAULT_MAX_LAG,
                  lag_order: int | None = None) -> CointegrationResult:
    y = _as_levels((a, b))
    if lag_order is None:
        lag_order = select_lag(y, min(max_lag, max(1, y.shape[0] - 3)))
    return johansen_test(fit_vecm(y, lag_order))


def _scan_one(args) -> PairScan:
    a, b, max_lag, lag_order = args
    try:
        return PairScan(a.commodity_id, b.commodity_id, johansen_pair(a, b, max_lag, lag_order))
    except (InputError, NumericalError) as exc:
        logger.warning("pair %s/%s failed: %s", a.commodity_id, b.commodity_id, exc)
        return PairScan(a.commodity_id, b.commodity_id, error=f"{type(exc).__name__}: {exc}")


def scan_all(
    universe: Sequence[PriceSeries],
    train_fraction: float = 0.8,
    *,
    split_index: int | None = None,
    max_lag: int = DEFAULT_MAX_LAG,
    lag_order: int | None = None,
    workers: int = 1,
) -> list[PairScan]:
    """Test every unordered pair on its training segment; never aborts on one pair."""
    if len(universe) < 2:
        return []
    n = len(universe[0])
    k = split_index if split_index is not None else int(np.floor(train_fraction * n))
    train = [s.slice(0, k) for s in universe]
    jobs = [(a, b, max_lag, lag_order) for a, b in itertools.combinations(train, 2)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_one, jobs))
    return [_scan_one(job) for job in jobs]


def scan_pairs(universe: Sequence[PriceSeries], train_fraction: float = 0.8, **kwargs) -> list[PairScan]:
    """Pairs flagged cointegrated (rank >= 1) by :func:`scan_all`."""
    return [p for p in scan_all(universe, train_fraction, **kwargs) if p.cointegrated]
