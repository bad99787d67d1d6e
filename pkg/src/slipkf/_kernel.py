"""Compiled loop that runs the regular or slip Kalman filter over a whole trace.

The arithmetic mirrors :func:`slipkf.filter.kf_step` and
:func:`slipkf.filter.slip_kf_step` operation by operation; per-step Python
and numpy overhead would otherwise dominate on pages of 10^4+ samples.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


OK = 0
NON_FINITE = 1
NOT_POSITIVE_DEFINITE = 2
ILL_CONDITIONED = 3


@njit(cache=True)
def run_filter(
    z,
    x0,
    p0,
    f,
    q,
    h,
    r,
    slip,
    threshold,
    reinit_velocity,
    gamma,
    refractory,
    max_condition,
    det_floor,
):
    """Filter measurements ``z`` (shape ``(n, 2)``) starting from ``x0, p0``.

    Returns ``(estimates, nis, resets, status, bad_index)``. On failure
    ``status`` is non-zero and ``bad_index`` is the offending row of ``z``.
    """
    n = z.shape[0]
    est = np.empty((n, 4))
    nis_out = np.full(n, np.nan)
    resets = np.zeros(n, dtype=np.bool_)

    x = x0.copy()
    p = p0.copy()
    since_reset = 0
    x_pred = np.empty(4)
    fp = np.empty((4, 4))
    p_pred = np.empty((4, 4))
    pht = np.empty((4, 2))
    s = np.empty((2, 2))
    s_inv = np.empty((2, 2))
    w = np.empty((4, 2))
    ws = np.empty((4, 2))
    nu = np.empty(2)

    for k in range(n):
        zx = z[k, 0]
        zy = z[k, 1]
        if not (math.isfinite(zx) and math.isfinite(zy)):
            return est, nis_out, resets, NON_FINITE, k

        if slip and since_reset >= refractory and x[1] < threshold:
            vy = x[3]
            x[0] = zx
            x[1] = reinit_velocity
            x[2] = zy
            x[3] = vy
            for i in range(4):
                for j in range(4):
                    p[i, j] = gamma if i == j else 0.0
            since_reset = 0
            resets[k] = True
            est[k] = x
            continue

        # prediction
        for i in range(4):
            acc = 0.0
            for j in range(4):
                acc += f[i, j] * x[j]
            x_pred[i] = acc
        for i in range(4):
            for j in range(4):
                acc = 0.0
                for m in range(4):
                    acc += f[i, m] * p[m, j]
                fp[i, j] = acc
        for i in range(4):
            for j in range(4):
                acc = 0.0
                for m in range(4):
                    acc += fp[i, m] * f[j, m]
                p_pred[i, j] = acc + q[i, j]

        # innovation
        for i in range(4):
            for j in range(2):
                acc = 0.0
                for m in range(4):
                    acc += p_pred[i, m] * h[j, m]
                pht[i, j] = acc
        for i in range(2):
            for j in range(2):
                acc = 0.0
                for m in range(4):
                    acc += h[i, m] * pht[m, j]
                s[i, j] = r[i, j] + acc
        for i in range(2):
            acc = 0.0
            for m in range(4):
                acc += h[i, m] * x_pred[m]
            nu[i] = z[k, i] - acc

        a = s[0, 0]
        b = s[0, 1]
        c = s[1, 0]
        d = s[1, 1]
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c) and math.isfinite(d)):
            return est, nis_out, resets, NON_FINITE, k
        det = a * d - b * c
        half_trace = 0.5 * (a + d)
        spread = math.hypot(0.5 * (a - d), 0.5 * (b + c))
        lo = half_trace - spread
        hi = half_trace + spread
        if lo <= 0.0 or det <= det_floor:
            return est, nis_out, resets, NOT_POSITIVE_DEFINITE, k
        if hi / lo > max_condition:
            return est, nis_out, resets, ILL_CONDITIONED, k
        s_inv[0, 0] = d / det
        s_inv[0, 1] = -b / det
        s_inv[1, 0] = -c / det
        s_inv[1, 1] = a / det

        # update
        for i in range(4):
            for j in range(2):
                w[i, j] = pht[i, 0] * s_inv[0, j] + pht[i, 1] * s_inv[1, j]
        for i in range(4):
            x[i] = x_pred[i] + w[i, 0] * nu[0] + w[i, 1] * nu[1]
        for i in range(4):
            for j in range(2):
                ws[i, j] = w[i, 0] * s[0, j] + w[i, 1] * s[1, j]
        for i in range(4):
            for j in range(4):
                p[i, j] = p_pred[i, j] - (ws[i, 0] * w[j, 0] + ws[i, 1] * w[j, 1])
        for i in range(4):
            for j in range(i + 1, 4):
                sym = 0.5 * (p[i, j] + p[j, i])
                p[i, j] = sym
                p[j, i] = sym

        value = 0.0
        for i in range(2):
            for j in range(2):
                value += nu[i] * s_inv[i, j] * nu[j]
        nis_out[k] = max(value, 0.0)
        since_reset += 1
        est[k] = x

    return est, nis_out, resets, OK, -1
