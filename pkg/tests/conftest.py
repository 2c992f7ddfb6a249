import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from stochspread.market_data import PriceSeries  # noqa: E402
from stochspread.simulate import business_days  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_series(name, log_prices, start="2015-01-01"):
    log_prices = np.asarray(log_prices, dtype=float)
    return PriceSeries(name, business_days(log_prices.size, start), log_prices)


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
