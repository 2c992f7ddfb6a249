"""Numba-compiled inner loops.

Every kernel here has a twin with the same signature in ``reference.py``;
the two are cross-checked in the test-suite and benchmarked in
``benchmarks/bench_kernels.py``.
"""
import functools
import math

import numba
import numpy as np

jit = functools.partial(numba.njit, cache=True, nogil=True)

_LOG_2PI = math.log(2.0 * math.pi)


@jit
def kalman_filter(s, x, y, z, v, m0, p0):
    """Scalar Kalman filter for zeta_t = x + y*zeta_{t-1} + z*eps, s_t = zeta_t + v*w.

    Returns (filtered_mean, filtered_var, predicted_mean, predicted_var,
    loglik, status). ``status`` is 0 on success, otherwise 1 + the index
    of the first step with a non-positive predictive variance.
    """
    n = s.shape[0]
    fm = np.empty(n)
    fv = np.empty(n)
    pm = np.empty(n)
    pv = np.empty(n)
    v2 = v * v
    z2 = z * z
    y2 = y * y
    a = m0
    p = p0
    loglik = 0.0
    for t in range(n):
        pm[t] = a
        pv[t] = p
        f = p + v2
        if not f > 0.0:
            return fm, fv, pm, pv, np.nan, t + 1
        e = s[t] - a
        loglik -= 0.5 * (_LOG_2PI + math.log(f) + e * e / f)
        # written so that v == 0 gives fm == s and fv == 0 bit-exactly
        fm[t] = s[t] - (v2 / f) * e
        fv[t] = p * (v2 / f)
        a = x + y * fm[t]
        p = y2 * fv[t] + z2
    return fm, fv, pm, pv, loglik, 0


@jit
def rts_smoother(fm, fv, pm, pv, y):
    """Fixed-interval (Rauch-Tung-Striebel) backward pass."""
    n = fm.shape[0]
    sm = np.empty(n)
    sv = np.empty(n)
    sm[n - 1] = fm[n - 1]
    sv[n - 1] = fv[n - 1]
    for t in range(n - 2, -1, -1):
        if pv[t + 1] > 0.0:
            g = y * fv[t] / pv[t + 1]
        else:
            g = 0.0
        sm[t] = fm[t] + g * (sm[t + 1] - pm[t + 1])
        sv[t] = fv[t] + g * g * (sv[t + 1] - pv[t + 1])
        if sv[t] < 0.0:
            sv[t] = 0.0
    return sm, sv


@jit
def loglik_batch(s, params, m0, fallback_var):
    """Log-likelihood for each row (x, y, z, v) of ``params``; NaN on failure."""
    n = s.shape[0]
    k = params.shape[0]
    out = np.empty(k)
    for j in range(k):
        x = params[j, 0]
        y = params[j, 1]
        z = params[j, 2]
        v = params[j, 3]
        if 1.0 - y < 1e-6:
            p = fallback_var
        else:
            p = z * z / (1.0 - y * y)
        v2 = v * v
        z2 = z * z
        y2 = y * y
        a = m0
        ll = 0.0
        for t in range(n):
            f = p + v2
            if not f > 0.0:
                ll = np.nan
                break
            e = s[t] - a
            ll -= 0.5 * (_LOG_2PI + math.log(f) + e * e / f)
            r = v2 / f
            a = x + y * (s[t] - r * e)
            p = y2 * (p * r) + z2
        out[j] = ll
    return out


@jit
def rule_positions(s, mu, band, exit_eps):
    """End-of-day positions (-1 short, 0 flat, +1 long) of the threshold rule.

    Exits are tested before entries; a day that closes a trade stays flat.
    No entry on the final observation, and anything open there is closed.
    """
    n = s.shape[0]
    pos = np.zeros(n, dtype=np.int8)
    cur = 0
    upper = mu + band
    lower = mu - band
    for t in range(n):
        st = s[t]
        if cur == -1:
            if st <= mu + exit_eps * st:
                cur = 0
        elif cur == 1:
            if st >= mu - exit_eps * st:
                cur = 0
        elif t < n - 1:
            if st >= upper:
                cur = -1
            elif st <= lower:
                cur = 1
        pos[t] = cur
    if n > 0:
        pos[n - 1] = 0
    return pos


@jit
def max_drawdown(equity, relative):
    """Most negative excursion below the running peak (absolute or peak-relative)."""
    n = equity.shape[0]
    if n == 0:
        return 0.0
    peak = equity[0]
    worst = 0.0
    for t in range(n):
        e = equity[t]
        if e > peak:
            peak = e
        if relative:
            d = (e - peak) / peak
        else:
            d = e - peak
        if d < worst:
            worst = d
    return worst
