import numpy as np
import pytest

from stochspread.backtest import backtest, TradingRule
from stochspread.config import build_config, load_config, parse_config_text
from stochspread.errors import ConfigError
from stochspread.report import (
    cointegrated_rows,
    combine_metrics,
    fmt,
    metrics_path,
    metrics_row,
    read_scan_csv,
    write_metrics_csv,
)
from stochspread.spread_model import SpreadSeries


def test_parse_and_override(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\nseed = 4\nbounds_v = 0, 0.5  # trailing\nrelative_drawdown = yes\n\n")
    cfg = load_config(path, {"seed": 9, "workers": None})
    assert cfg.seed == 9 and cfg.workers == 1
    assert cfg.bounds_v == (0.0, 0.5) and cfg.relative_drawdown is True
    assert cfg.de_config(1).bounds[3] == (0.0, 0.5)


@pytest.mark.parametrize("text", ["seed 4", "nonsense = 1", "seed = x", "c_spacing = cubic",
                                  "train_fraction = 1.5", "bounds_x = 1", "de_population = 2"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        build_config(parse_config_text(text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="no such config"):
        load_config(tmp_path / "absent.cfg")


def test_c_grid_and_seeds():
    cfg = build_config({"c_count": "5", "c_spacing": "linear", "c_min": "0", "c_max": "4"})
    np.testing.assert_array_equal(cfg.c_grid(), [0, 1, 2, 3, 4])
    assert cfg.pair_seed("A__B") == cfg.pair_seed("A__B") != cfg.pair_seed("A__C")
    assert build_config({"seed": "1"}).pair_seed("A__B") != cfg.pair_seed("A__B")


def test_snapshot_round_trips_through_parser():
    cfg = build_config({"seed": "3", "split_index": "100", "bounds_z": "1e-9,0.5"})
    text = "\n".join(f"{k} = {v}" for k, v in cfg.snapshot())
    assert build_config(parse_config_text(text)) == cfg


def test_fmt():
    assert fmt(None) == "" and fmt(float("nan")) == ""
    assert fmt(0.12610000000000002) == "0.1261"
    assert fmt(np.int64(7)) == "7" and fmt(88.0) == "88" and fmt(-0.0) == "-0"


def test_metrics_rows_and_combination(tmp_path):
    rep = backtest(SpreadSeries.from_values([0.0, 2.0, 0.0, 1.0]), TradingRule(1.0, 0.0, 0.5, 1.0))
    row = metrics_row("A", "B", rep)
    assert row[:3] == ["A", "B", "1"] and row[-2:] == ["0", "1"]
    assert metrics_row("A", "C", None) == ["A", "C", "", "", "0", "0", "0", "0", "0", "0"]
    write_metrics_csv(metrics_path(tmp_path, "A__B", "train"), [row])
    rows, missing = combine_metrics(tmp_path, ["A__C", "A__B"], "train")
    assert rows == [row] and missing == ["A__C"]


def test_cointegrated_rows_filter(tmp_path):
    path = tmp_path / "scan.csv"
    path.write_text("pair_a,pair_b,rank,hedge_ratio\nA,B,1,-0.5\nA,C,0,\nB,C,,\n")
    assert [r["pair_b"] for r in cointegrated_rows(read_scan_csv(path))] == ["B"]
