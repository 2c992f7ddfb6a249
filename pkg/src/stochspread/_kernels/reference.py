"""Pure numpy versions of the compiled kernels in ``jit.py``.

Used when numba is unavailable or disabled through the environment. The
recursions are inherently sequential in time, so only the population
axis of ``loglik_batch`` and the running peak of ``max_drawdown`` are
vectorised.
"""
import math

import numpy as np

_LOG_2PI = math.log(2.0 * math.pi)


def kalman_filter(s, x, y, z, v, m0, p0):
    n = s.shape[0]
    fm = np.empty(n)
    fv = np.empty(n)
    pm = np.empty(n)
    pv = np.empty(n)
    v2, z2, y2 = v * v, z * z, y * y
    a, p = float(m0), float(p0)
    loglik = 0.0
    for t in range(n):
        pm[t] = a
        pv[t] = p
        f = p + v2
        if not f > 0.0:
            return fm, fv, pm, pv, np.nan, t + 1
        st = float(s[t])
        e = st - a
        loglik -= 0.5 * (_LOG_2PI + math.log(f) + e * e / f)
        fm[t] = st - (v2 / f) * e
        fv[t] = p * (v2 / f)
        a = x + y * fm[t]
        p = y2 * fv[t] + z2
    return fm, fv, pm, pv, loglik, 0


def rts_smoother(fm, fv, pm, pv, y):
    n = fm.shape[0]
    sm = np.empty(n)
    sv = np.empty(n)
    sm[-1] = fm[-1]
    sv[-1] = fv[-1]
    for t in range(n - 2, -1, -1):
        g = y * fv[t] / pv[t + 1] if pv[t + 1] > 0.0 else 0.0
        sm[t] = fm[t] + g * (sm[t + 1] - pm[t + 1])
        sv[t] = max(fv[t] + g * g * (sv[t + 1] - pv[t + 1]), 0.0)
    return sm, sv


def loglik_batch(s, params, m0, fallback_var):
    params = np.asarray(params, dtype=float)
    x, y, z, v = params.T
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(1.0 - y < 1e-6, fallback_var, z * z / (1.0 - y * y))
        v2, z2, y2 = v * v, z * z, y * y
        a = np.full(params.shape[0], float(m0))
        ll = np.zeros(params.shape[0])
        failed = np.zeros(params.shape[0], dtype=bool)
        for st in s:
            f = p + v2
            failed |= ~(f > 0.0)
            e = st - a
            ll -= 0.5 * (_LOG_2PI + np.log(f) + e * e / f)
            r = v2 / f
            a = x + y * (st - r * e)
            p = y2 * (p * r) + z2
    ll[failed] = np.nan
    return ll


def rule_positions(s, mu, band, exit_eps):
    n = s.shape[0]
    pos = np.zeros(n, dtype=np.int8)
    cur = 0
    upper, lower = mu + band, mu - band
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
        pos[-1] = 0
    return pos


def max_drawdown(equity, relative):
    equity = np.asarray(equity, dtype=float)
    if equity.size == 0:
        return 0.0
    peak = np.maximum.accumulate(equity)
    dd = (equity - peak) / peak if relative else equity - peak
    return min(float(dd.min()), 0.0)
