"""Command-line pipeline: simulate, scan, fit, backtest, report.

Every command writes ``manifest.txt`` into the output directory holding
the toolkit version, kernel backend, command and the full resolved
configuration, which is enough to regenerate every output file.
Later stages reuse earlier outputs found in the output directory and
compute them on demand otherwise, with identical results either way.
"""
from __future__ import annotations

import argparse
import glob
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, _kernels
from .backtest import evaluate_pair, optimize_c
from .cointegration import scan_all
from .config import PipelineConfig, load_config
from .errors import NoTradeError, StochSpreadError
from .estimation import fit_spread_model, read_fit_report, write_fit_report
from .market_data import load_csv, pair_id, prepare_universe, split
from .plotting import write_equity_svg
from .report import (
    SEGMENTS,
    cointegrated_rows,
    combine_metrics,
    metrics_path,
    metrics_row,
    read_scan_csv,
    write_equity_csv,
    write_metrics_csv,
    write_scan_csv,
)
from .simulate import SimSpec, simulate_universe, write_price_csv
from .spread_model import OUParams, StateSpaceParams, build_spread, from_statespace

logger = logging.getLogger("stochspread")


class PipelineError(StochSpreadError):
    pass


def _out(cfg: PipelineConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def write_manifest(cfg: PipelineConfig, command: str) -> None:
    os.makedirs(cfg.output_dir, exist_ok=True)
    lines = [
        f"toolkit_version = {__version__}",
        f"kernel_backend = {_kernels.BACKEND}",
        f"command = {command}",
    ]
    lines += [f"{k} = {v}" for k, v in cfg.snapshot()]
    with open(_out(cfg, "manifest.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_universe(cfg: PipelineConfig):
    return prepare_universe(load_csv(cfg.data_path))


def cmd_scan(cfg: PipelineConfig, universe=None) -> list[dict]:
    universe = load_universe(cfg) if universe is None else universe
    scans = scan_all(universe, cfg.train_fraction, split_index=cfg.split_index,
                     max_lag=cfg.max_lag, lag_order=cfg.lag_order, workers=cfg.workers)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = _out(cfg, "scan.csv")
    write_scan_csv(path, scans)
    for s in scans:
        if s.cointegrated:
            print(f"{s.name_a} {s.name_b} hedge_ratio={s.result.hedge_ratio:.6g}")
        elif s.error:
            logger.warning("%s/%s not tested: %s", s.name_a, s.name_b, s.error)
    return read_scan_csv(path)


def ensure_scan(cfg: PipelineConfig, universe) -> list[dict]:
    path = _out(cfg, "scan.csv")
    if os.path.exists(path):
        return read_scan_csv(path)
    return cmd_scan(cfg, universe)


def find_pair(rows: list[dict], wanted: str) -> dict:
    for row in cointegrated_rows(rows):
        if pair_id(row["pair_a"], row["pair_b"]) == wanted:
            return row
    raise PipelineError(f"unknown pair {wanted!r}: not among the cointegrated pairs in scan.csv")


def _dataset(cfg: PipelineConfig, by_name: dict, row: dict):
    try:
        a, b = by_name[row["pair_a"]], by_name[row["pair_b"]]
    except KeyError as exc:
        raise PipelineError(f"series {exc} from scan.csv not found in {cfg.data_path}") from None
    return split((a, b), cfg.train_fraction, cfg.split_index), float(row["hedge_ratio"])


def ensure_fit(cfg: PipelineConfig, by_name: dict, row: dict, force: bool = False) -> OUParams:
    dataset, hedge = _dataset(cfg, by_name, row)
    pid = dataset.pair_id
    path = _out(cfg, f"fit_{pid}.csv")
    if os.path.exists(path) and not force:
        rep = read_fit_report(path)
        best = StateSpaceParams(*(float(rep[k]) for k in ("X", "Y", "Z", "V")))
        return from_statespace(best)
    spread = build_spread(dataset.training(), hedge)
    fit = fit_spread_model(spread, cfg.de_config(cfg.pair_seed(pid)), cfg.min_spread_length)
    write_fit_report(path, fit, extra=[("pair_a", row["pair_a"]), ("pair_b", row["pair_b"]),
                                       ("hedge_ratio", hedge)])
    return fit.ou_params


def cmd_fit(cfg: PipelineConfig, pair: str) -> OUParams:
    universe = load_universe(cfg)
    rows = ensure_scan(cfg, universe)
    row = find_pair(rows, pair)
    by_name = {s.commodity_id: s for s in universe}
    ou = ensure_fit(cfg, by_name, row, force=True)
    print(f"{pair} kappa={ou.kappa:.6g} mu={ou.mu:.6g} sigma={ou.sigma:.6g} v={ou.v:.6g}")
    return ou


def backtest_pair(cfg: PipelineConfig, by_name: dict, row: dict) -> None:
    """Fit (if needed), choose c in-sample, evaluate both segments, write per-pair files."""
    dataset, hedge = _dataset(cfg, by_name, row)
    pid = dataset.pair_id
    ou = ensure_fit(cfg, by_name, row)
    train_spread = build_spread(dataset.training(), hedge)
    segments = {"train": train_spread, "test": build_spread(dataset.testing(), hedge)}
    kwargs = dict(relative_drawdown=cfg.relative_drawdown, cost_per_trade=cfg.cost_per_trade)
    try:
        c, _ = optimize_c(train_spread, ou, cfg.c_grid(), cfg.risk_free_annual, **kwargs)
    except NoTradeError as exc:
        logger.warning("%s: %s", pid, exc)
        reports = {"train": None, "test": None}
    else:
        ev = evaluate_pair(dataset, hedge, ou, c, cfg.risk_free_annual, **kwargs)
        reports = {"train": ev.train, "test": ev.test}
    for seg in SEGMENTS:
        rep = reports[seg]
        spread = segments[seg]
        write_metrics_csv(metrics_path(cfg.output_dir, pid, seg),
                          [metrics_row(row["pair_a"], row["pair_b"], rep)])
        equity = rep.equity_curve if rep is not None else np.ones(len(spread))
        write_equity_csv(_out(cfg, f"equity_{pid}_{seg}.csv"), spread.dates, equity)
        write_equity_svg(_out(cfg, f"equity_{pid}_{seg}.svg"), spread.dates, equity,
                         f"{row['pair_a']} / {row['pair_b']} ({seg})")


def _backtest_job(args):
    cfg, by_name, row = args
    try:
        backtest_pair(cfg, by_name, row)
        return None
    except StochSpreadError as exc:
        return f"{pair_id(row['pair_a'], row['pair_b'])}: {type(exc).__name__}: {exc}"


def cmd_backtest(cfg: PipelineConfig, pair: str | None = None) -> list[str]:
    """Backtest one pair or every cointegrated pair; returns per-pair failures."""
    universe = load_universe(cfg)
    rows = ensure_scan(cfg, universe)
    by_name = {s.commodity_id: s for s in universe}
    selected = [find_pair(rows, pair)] if pair else cointegrated_rows(rows)
    jobs = [(cfg, by_name, r) for r in selected]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            failures = [f for f in pool.map(_backtest_job, jobs) if f]
    else:
        failures = [f for f in map(_backtest_job, jobs) if f]
    for f in failures:
        logger.error(f)
    cmd_report(cfg)
    return failures


def cmd_report(cfg: PipelineConfig) -> dict:
    scan_path = _out(cfg, "scan.csv")
    if os.path.exists(scan_path):
        pairs = [pair_id(r["pair_a"], r["pair_b"]) for r in cointegrated_rows(read_scan_csv(scan_path))]
    else:
        prefix = os.path.join(cfg.output_dir, "metrics_")
        pairs = sorted(p[len(prefix):-len("_train.csv")] for p in glob.glob(prefix + "*_train.csv"))
    tables = {}
    os.makedirs(cfg.output_dir, exist_ok=True)
    for seg in SEGMENTS:
        rows, missing = combine_metrics(cfg.output_dir, pairs, seg)
        for pid in missing:
            logger.warning("no %s metrics for pair %s", seg, pid)
        write_metrics_csv(_out(cfg, f"backtest_{seg}.csv"), rows)
        tables[seg] = rows
    return tables


def cmd_simulate(cfg: PipelineConfig, args) -> str:
    ou = OUParams(args.kappa, args.mu, args.sigma, args.v)
    spec = SimSpec(ou=ou, length=args.length, seed=cfg.seed, beta=args.beta,
                   walk_volatility=args.walk_vol)
    series, truth = simulate_universe(args.pairs, args.singles, spec)
    parent = os.path.dirname(os.path.abspath(cfg.data_path))
    os.makedirs(parent, exist_ok=True)
    write_price_csv(cfg.data_path, series)
    for a, b in truth:
        print(f"cointegrated {a} {b} hedge_ratio={-args.beta:.6g}")
    return cfg.data_path


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--data", dest="data_path", help="price CSV (date column + one column per commodity)")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--split-index", dest="split_index", type=int)
    common.add_argument("--train-fraction", dest="train_fraction", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="stochspread", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("scan", parents=[common], help="Johansen test on every pair")
    for name, text in (("fit", "fit the spread model for one pair"),
                       ("backtest", "choose c in-sample and backtest both segments")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--pair", required=name == "fit", help="pair id A__B as listed in scan.csv")
    sub.add_parser("report", parents=[common], help="combine per-pair metric rows")
    p = sub.add_parser("simulate", parents=[common], help="write a synthetic price CSV")
    p.add_argument("--pairs", type=int, default=3)
    p.add_argument("--singles", type=int, default=0)
    p.add_argument("--length", type=int, default=2347)
    p.add_argument("--kappa", type=float, default=0.2)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--v", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--walk-vol", dest="walk_vol", type=float, default=0.02)
    return parser


_OVERRIDES = ("data_path", "output_dir", "seed", "workers", "split_index", "train_fraction")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        cfg = load_config(args.config, {k: getattr(args, k) for k in _OVERRIDES})
        status = 0
        if args.command == "scan":
            cmd_scan(cfg)
        elif args.command == "fit":
            cmd_fit(cfg, args.pair)
        elif args.command == "backtest":
            status = 1 if cmd_backtest(cfg, args.pair) else 0
        elif args.command == "report":
            cmd_report(cfg)
        elif args.command == "simulate":
            cmd_simulate(cfg, args)
        write_manifest(cfg, args.command)
        return status
    except (StochSpreadError, OSError) as exc:
        print(f"stochspread: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
