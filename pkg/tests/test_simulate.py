import numpy as np
import pytest

from stochspread.errors import DomainError, InputError
from stochspread.market_data import load_csv
from stochspread.simulate import (
    SimSpec,
    business_days,
    simulate_cointegrated_pair,
    simulate_ou_spread,
    simulate_random_walk_pair,
    simulate_universe,
    write_price_csv,
)
from stochspread.spread_model import OUParams, to_statespace


def test_ou_spread_follows_transition_exactly():
    spec = SimSpec(seed=3, length=200)
    sim = simulate_ou_spread(spec)
    ss = to_statespace(spec.ou)
    prev = np.concatenate([[spec.ou.mu], sim.latent[:-1]])
    np.testing.assert_allclose(sim.latent, ss.x + ss.y * prev + ss.z * sim.state_shocks, rtol=0, atol=1e-14)
    np.testing.assert_allclose(sim.spread.values, sim.latent + ss.v * sim.measurement_shocks, atol=1e-15)


def test_seeded_runs_are_bit_identical_and_seeds_differ():
    a = simulate_ou_spread(SimSpec(seed=9)).spread.values
    b = simulate_ou_spread(SimSpec(seed=9)).spread.values
    c = simulate_ou_spread(SimSpec(seed=10)).spread.values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_long_run_moments():
    ou = OUParams(0.1, 2.0, 0.05, 0.0)
    sim = simulate_ou_spread(SimSpec(ou=ou, length=200_000, seed=1))
    x = sim.spread.values
    assert x.mean() == pytest.approx(2.0, abs=0.01)
    # discrete AR(1) stationary variance sigma^2 / (1 - (1 - kappa)^2)
    assert x.var() == pytest.approx(0.05 ** 2 / (1 - 0.9 ** 2), rel=0.05)
    assert np.corrcoef(x[1:], x[:-1])[0, 1] == pytest.approx(0.9, abs=0.01)


def test_cointegrated_pair_identity():
    spec = SimSpec(seed=4, beta=0.7)
    pair = simulate_cointegrated_pair(spec)
    np.testing.assert_allclose(pair.series_a.log_prices - 0.7 * pair.series_b.log_prices, pair.latent,
                               atol=1e-12)
    assert pair.hedge_ratio == -0.7
    assert pair.series_a.log_prices[0] == pytest.approx(np.log(100.0))
    with pytest.raises(DomainError):
        simulate_cointegrated_pair(SimSpec(beta=0.0))


def test_random_walk_pair_is_independent_noise():
    pair = simulate_random_walk_pair(SimSpec(seed=5, length=5000, walk_volatility=0.02))
    da, db = np.diff(pair.series_a.log_prices), np.diff(pair.series_b.log_prices)
    assert da.std() == pytest.approx(0.02, rel=0.05)
    assert abs(np.corrcoef(da, db)[0, 1]) < 0.05


def test_universe_and_csv_round_trip(tmp_path):
    series, truth = simulate_universe(2, 3, SimSpec(length=50, seed=1))
    assert [s.commodity_id for s in series] == ["P1A", "P1B", "P2A", "P2B", "S1", "S2", "S3"]
    assert truth == [("P1A", "P1B"), ("P2A", "P2B")]
    path = tmp_path / "prices.csv"
    write_price_csv(path, series)
    back = load_csv(path)
    for s, r in zip(series, back):
        np.testing.assert_array_equal(s.dates, r.dates)
        np.testing.assert_allclose(s.log_prices, r.log_prices, rtol=0, atol=1e-14)


def test_business_days_and_validation():
    d = business_days(5, "2021-01-01")
    assert np.is_busday(d).all() and d[0] == np.datetime64("2021-01-01")
    with pytest.raises(InputError):
        SimSpec(length=1)
    with pytest.raises(InputError):
        write_price_csv("unused.csv", [])


def test_noiseless_spread_started_at_mu_stays_constant():
    sim = simulate_ou_spread(SimSpec(ou=OUParams(0.1, 2.0, 0.0, 0.0), length=500, initial_state=2.0))
    np.testing.assert_allclose(sim.spread.values, 2.0, rtol=0, atol=1e-15)


def test_latent_moments_with_measurement_noise():
    sim = simulate_ou_spread(SimSpec(ou=OUParams(0.1, 2.0, 0.05, 0.02), length=100_000, seed=2))
    assert sim.spread.values.mean() == pytest.approx(2.0, abs=0.01)
    assert sim.latent.var() == pytest.approx(0.05 ** 2 / (1 - 0.9 ** 2), rel=0.05)


def test_zero_walk_volatility_is_degenerate_for_johansen():
    from stochspread.cointegration import johansen_pair
    from stochspread.errors import DegenerateInputError

    pair = simulate_cointegrated_pair(SimSpec(seed=1, length=300, walk_volatility=0.0))
    with pytest.raises(DegenerateInputError):
        johansen_pair(pair.series_a, pair.series_b)
