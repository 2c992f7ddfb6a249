"""Cointegrated pairs discovery, latent OU spread estimation and threshold backtesting."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .backtest import (
    BacktestReport,
    Trade,
    TradingRule,
    backtest,
    compute_metrics,
    evaluate_pair,
    optimize_c,
    run_rule,
)
from .cointegration import (
    CointegrationResult,
    VecmFit,
    fit_vecm,
    johansen_pair,
    johansen_test,
    scan_all,
    scan_pairs,
    select_lag,
)
from .estimation import DeConfig, FitResult, de_optimize, fit_spread_model
from .market_data import PairDataset, PriceSeries, interpolate_gaps, load_csv, prepare_universe, split
from .simulate import SimSpec, simulate_cointegrated_pair, simulate_ou_spread
from .spread_model import (
    KalmanOutput,
    OUParams,
    SpreadSeries,
    StateSpaceParams,
    build_spread,
    from_statespace,
    half_life,
    kalman_filter,
    to_statespace,
)
