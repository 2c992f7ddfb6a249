import filecmp
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from stochspread import cli
from stochspread.report import SCAN_COLUMNS

SIM = ["--pairs", "2", "--singles", "2", "--length", "700"]


def args(tmp, *extra):
    return ["--data", str(tmp / "prices.csv"), "--out", str(tmp / "out"), *extra]


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipe")
    assert cli.main(["simulate", *SIM, *args(tmp)]) == 0
    assert cli.main(["scan", *args(tmp)]) == 0
    assert cli.main(["backtest", *args(tmp)]) == 0
    return tmp


def test_outputs_exist_and_are_consistent(pipeline):
    out = pipeline / "out"
    names = set(os.listdir(out))
    assert {"scan.csv", "backtest_train.csv", "backtest_test.csv", "manifest.txt"} <= names
    assert "fit_P1A__P1B.csv" in names
    for seg in ("train", "test"):
        assert f"equity_P1A__P1B_{seg}.csv" in names
        root = ET.parse(out / f"equity_P1A__P1B_{seg}.svg").getroot()
        assert root.tag.endswith("svg")
    scan = (out / "scan.csv").read_text().splitlines()
    assert scan[0].startswith("pair_a,pair_b,lag,eigen1,eigen2,trace_r0,crit_r0_5pct")
    assert len(scan) == 1 + 15  # C(6, 2) pairs
    train = (out / "backtest_train.csv").read_text().splitlines()
    assert train[0] == "commodity1,commodity2,c,SR,CAGR,max_drawdown,skew,kurt,n_long,n_short"
    assert train[1].startswith("P1A,P1B,")


def test_manifest_records_configuration(pipeline):
    text = (pipeline / "out" / "manifest.txt").read_text()
    assert "toolkit_version = 0.1.0" in text and "kernel_backend = " in text
    assert "command = backtest" in text and "de_population = 40" in text


def test_rerun_is_byte_identical_and_stages_compose(pipeline, tmp_path):
    # fresh directory, explicit fit stage first, then backtest reusing it
    assert cli.main(["scan", *args(tmp_path, "--data", str(pipeline / "prices.csv"))]) == 0
    assert cli.main(["fit", "--pair", "P1A__P1B", *args(tmp_path, "--data", str(pipeline / "prices.csv"))]) == 0
    assert cli.main(["backtest", *args(tmp_path, "--data", str(pipeline / "prices.csv"))]) == 0
    a, b = pipeline / "out", tmp_path / "out"
    for name in os.listdir(a):
        if name != "manifest.txt":
            assert filecmp.cmp(a / name, b / name, shallow=False), name


def test_workers_do_not_change_results(pipeline, tmp_path):
    data = str(pipeline / "prices.csv")
    assert cli.main(["backtest", "--workers", "2", *args(tmp_path, "--data", data)]) == 0
    for seg in ("train", "test"):
        name = f"backtest_{seg}.csv"
        assert filecmp.cmp(pipeline / "out" / name, tmp_path / "out" / name, shallow=False)


def test_report_warns_about_missing_pairs(pipeline, tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    (out / "scan.csv").write_bytes((pipeline / "out" / "scan.csv").read_bytes())
    for seg in ("train", "test"):
        src = pipeline / "out" / f"metrics_P1A__P1B_{seg}.csv"
        (out / src.name).write_bytes(src.read_bytes())
    assert cli.main(["report", "--out", str(out)]) == 0
    assert "no train metrics for pair P2A__P2B" in capsys.readouterr().err
    assert len((out / "backtest_train.csv").read_text().splitlines()) == 2


def test_errors_exit_nonzero(tmp_path, capsys):
    assert cli.main(["scan", *args(tmp_path)]) == 1
    assert "prices.csv" in capsys.readouterr().err
    assert cli.main(["scan", "--config", str(tmp_path / "nope.cfg")]) == 1
    with pytest.raises(SystemExit):
        cli.main(["fit"])


def test_unknown_pair(pipeline, tmp_path, capsys):
    data = str(pipeline / "prices.csv")
    assert cli.main(["fit", "--pair", "X__Y", *args(tmp_path, "--data", data)]) == 1
    assert "unknown pair" in capsys.readouterr().err


def test_numpy_backend_via_environment(pipeline, tmp_path):
    env = dict(os.environ, STOCHSPREAD_DISABLE_JIT="1")
    code = ("import sys; from stochspread import cli, _kernels; "
            "assert _kernels.BACKEND == 'numpy'; sys.exit(cli.main(sys.argv[1:]))")
    cmd = [sys.executable, "-c", code, "backtest", "--pair", "P1A__P1B",
           *args(tmp_path, "--data", str(pipeline / "prices.csv"))]
    (tmp_path / "out").mkdir()
    (tmp_path / "out" / "scan.csv").write_bytes((pipeline / "out" / "scan.csv").read_bytes())
    subprocess.run(cmd, check=True, env=env)
    assert "kernel_backend = numpy" in (tmp_path / "out" / "manifest.txt").read_text()
    jit_row = (pipeline / "out" / "metrics_P1A__P1B_train.csv").read_text().splitlines()[1].split(",")
    np_row = (tmp_path / "out" / "metrics_P1A__P1B_train.csv").read_text().splitlines()[1].split(",")
    assert np_row[:2] == jit_row[:2]
    assert float(np_row[3]) == pytest.approx(float(jit_row[3]), rel=1e-6)


def _universe_scan(seed):
    from stochspread.cointegration import scan_all
    from stochspread.simulate import SimSpec, simulate_universe
    from stochspread.spread_model import OUParams

    spec = SimSpec(ou=OUParams(0.2, 1.0, 0.02), length=2347, seed=seed, walk_volatility=0.02)
    series, truth = simulate_universe(3, 11, spec)
    hits = {(s.name_a, s.name_b) for s in scan_all(series, 0.8) if s.cointegrated}
    return set(truth), hits


@pytest.mark.slow
def test_scan_finds_planted_pairs_in_17_series_universe():
    found = sum(truth <= hits for truth, hits in map(_universe_scan, range(5)))
    assert found >= 3


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="trace test is oversized on driftless walks (acceptance criterion 1)")
def test_scan_false_positives_are_rare():
    rates = []
    for seed in range(5):
        truth, hits = _universe_scan(seed)
        rates.append(len(hits - truth) / (136 - len(truth)))
    assert np.mean(rates) <= 0.05


def test_single_series_universe_gives_empty_scan(tmp_path):
    data = tmp_path / "one.csv"
    data.write_text("date,A\n2020-01-01,1\n2020-01-02,2\n2020-01-03,3\n")
    assert cli.main(["scan", "--data", str(data), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "scan.csv").read_text().splitlines() == [",".join(SCAN_COLUMNS)]
    assert cli.main(["report", "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "backtest_train.csv").read_text().count("\n") == 1


def test_flat_spread_pair_reports_zero_trades(tmp_path):
    n = 200
    rng = np.random.default_rng(0)
    b = 50 * np.exp(np.cumsum(rng.normal(0, 0.01, n)))
    a = 2 * b  # log a - log b is constant
    dates = np.busday_offset(np.datetime64("2020-01-01"), np.arange(n), roll="forward")
    data = tmp_path / "flat.csv"
    data.write_text("date,A,B\n" + "".join(f"{d},{x:.12g},{y:.12g}\n" for d, x, y in zip(dates, a, b)))
    out = tmp_path / "out"
    out.mkdir()
    (out / "scan.csv").write_text(",".join(SCAN_COLUMNS) + "\nA,B,1,,,,,,,1,-1.0\n")
    assert cli.main(["backtest", "--data", str(data), "--out", str(out)]) == 0
    for seg in ("train", "test"):
        assert (out / f"backtest_{seg}.csv").read_text().splitlines()[1] == "A,B,,,0,0,0,0,0,0"


def test_repeated_fit_writes_identical_bytes(pipeline, tmp_path):
    run = ["fit", "--pair", "P1A__P1B", *args(tmp_path, "--data", str(pipeline / "prices.csv"))]
    assert cli.main(run) == 0
    first = (tmp_path / "out" / "fit_P1A__P1B.csv").read_bytes()
    assert cli.main(run) == 0
    assert (tmp_path / "out" / "fit_P1A__P1B.csv").read_bytes() == first
