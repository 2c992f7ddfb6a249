"""The numba kernels and their numpy twins must agree."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stochspread._kernels import jit, reference

finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(2, 60), elements=finite),
       st.floats(0.0, 1.0), st.floats(0.01, 0.99), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_kalman_backends_agree(s, x, y, z, v):
    if z == 0.0 and v == 0.0:
        v = 0.1
    p0 = z * z / (1 - y * y)
    a = jit.kalman_filter(s, x, y, z, v, s[0], p0)
    b = reference.kalman_filter(s, x, y, z, v, s[0], p0)
    assert a[5] == b[5]
    if a[5] == 0:
        for u, w in zip(a[:4], b[:4]):
            np.testing.assert_allclose(u, w, rtol=1e-12, atol=1e-12)
        assert a[4] == pytest.approx(b[4], rel=1e-12)
        sa = jit.rts_smoother(*a[:4], y)
        sb = reference.rts_smoother(*b[:4], y)
        np.testing.assert_allclose(sa[0], sb[0], rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(sa[1], sb[1], rtol=1e-10, atol=1e-12)


def test_loglik_batch_matches_single_filter(rng):
    s = rng.normal(1.0, 0.3, 80)
    pop = np.column_stack([rng.uniform(0, 1, 30), rng.uniform(1e-6, 1 - 1e-6, 30),
                           rng.uniform(1e-8, 1, 30), rng.uniform(0, 1, 30)])
    pop[0, 1] = 1 - 1e-7  # unit-root fallback variance
    fallback = 10 * np.var(s, ddof=1)
    a = jit.loglik_batch(s, pop, s[0], fallback)
    b = reference.loglik_batch(s, pop, s[0], fallback)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    for row, ll in zip(pop, a):
        x, y, z, v = row
        p0 = fallback if 1 - y < 1e-6 else z * z / (1 - y * y)
        assert jit.kalman_filter(s, x, y, z, v, s[0], p0)[4] == pytest.approx(ll, rel=1e-12)


def test_loglik_batch_reports_failure_as_nan():
    s = np.array([1.0, 1.0, 1.0])
    out = jit.loglik_batch(s, np.array([[0.0, 0.5, 0.0, 0.0]]), 1.0, 0.0)
    ref = reference.loglik_batch(s, np.array([[0.0, 0.5, 0.0, 0.0]]), 1.0, 0.0)
    assert np.isnan(out[0]) and np.isnan(ref[0])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 80), elements=st.floats(-3, 3)),
       st.floats(-1, 1), st.floats(0, 2), st.sampled_from([0.0, 1e-4, 0.1]))
def test_rule_backends_agree(s, mu, band, eps):
    np.testing.assert_array_equal(jit.rule_positions(s, mu, band, eps),
                                  reference.rule_positions(s, mu, band, eps))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(0, 200), elements=st.floats(0.01, 10)), st.booleans())
def test_drawdown_backends_agree(e, relative):
    assert jit.max_drawdown(e, relative) == reference.max_drawdown(e, relative)
