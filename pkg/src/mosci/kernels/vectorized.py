"""Pure-numpy array kernels.

These mirror the loops in :mod:`mosci.kernels.scalar` and are used
when numba is disabled. They iterate element-wise algorithms in
lock-step over whole arrays, masking elements that have converged.
"""

import numpy as np
from scipy.special import erfc as _erfc
from scipy.special import gammaln

from .scalar import EPS, TINY, norm_ppf


def norm_cdf(x):
    return 0.5 * _erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))


def norm_ppf_array(q):
    q = np.asarray(q, dtype=float)
    return np.array([norm_ppf(float(v)) for v in q.ravel()]).reshape(q.shape)


def _log_beta(a, b):
    return gammaln(a) + gammaln(b) - gammaln(a + b)


def _betacf(x, a, b):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < TINY, TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, 20000):
        if not active.any():
            break
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        dn = 1.0 + aa * d
        dn = np.where(np.abs(dn) < TINY, TINY, dn)
        cn = 1.0 + aa / c
        cn = np.where(np.abs(cn) < TINY, TINY, cn)
        dn = 1.0 / dn
        hn = h * dn * cn
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        dn = 1.0 + aa * dn
        dn = np.where(np.abs(dn) < TINY, TINY, dn)
        cn = 1.0 + aa / cn
        cn = np.where(np.abs(cn) < TINY, TINY, cn)
        dn = 1.0 / dn
        delta = dn * cn
        hn = hn * delta
        d = np.where(active, dn, d)
        c = np.where(active, cn, c)
        h = np.where(active, hn, h)
        active &= np.abs(delta - 1.0) >= EPS
    return h


def betainc(x, a, b):
    x, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, a, b)))
    out = np.where(x >= 1.0, 1.0, 0.0)
    inner = (x > 0.0) & (x < 1.0)
    if not inner.any():
        return out
    xi, ai, bi = x[inner], a[inner], b[inner]
    lfront = ai * np.log(xi) + bi * np.log1p(-xi) - _log_beta(ai, bi)
    direct = xi < (ai + 1.0) / (ai + bi + 2.0)
    # evaluate each branch in its convergent region
    xs = np.where(direct, xi, 1.0 - xi)
    as_ = np.where(direct, ai, bi)
    bs = np.where(direct, bi, ai)
    cf = _betacf(xs, as_, bs)
    front = np.exp(lfront) * cf / as_
    out[inner] = np.where(direct, front, 1.0 - front)
    return out


def beta_pdf(x, a, b):
    x = np.asarray(x, dtype=float)
    inner = (x > 0.0) & (x < 1.0)
    xs = np.where(inner, x, 0.5)
    dens = np.exp((a - 1.0) * np.log(xs) + (b - 1.0) * np.log1p(-xs) - _log_beta(a, b))
    return np.where(inner, dens, 0.0)


def betaincinv(q, a, b):
    q, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (q, a, b)))
    q, a, b = q.copy(), a.copy(), b.copy()
    out = np.where(q >= 1.0, 1.0, 0.0)
    inner = (q > 0.0) & (q < 1.0)
    if not inner.any():
        return out
    qi, ai, bi = q[inner], a[inner], b[inner]
    lo = np.zeros_like(qi)
    hi = np.ones_like(qi)
    x = ai / (ai + bi)
    active = np.ones(qi.shape, dtype=bool)
    for _ in range(400):
        if not active.any():
            break
        f = betainc(x, ai, bi) - qi
        lo = np.where(active & (f < 0.0), x, lo)
        hi = np.where(active & (f > 0.0), x, hi)
        dens = beta_pdf(x, ai, bi)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = np.where(dens > 0.0, x - f / dens, -1.0)
        bad = ~((lo < xn) & (xn < hi))
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = (f == 0.0) | (np.abs(xn - x) <= 1e-15 * np.maximum(x, 1e-300))
        xn = np.where(f == 0.0, x, xn)
        x = np.where(active, xn, x)
        active &= ~done
    out[inner] = x
    return out


def bca_bounds(reps, theta, accel, alpha):
    reps = np.asarray(reps, dtype=float)
    nrow, nrep = reps.shape
    s = np.sort(reps, axis=1)
    below = (s < theta[:, None]).sum(axis=1)
    ties = (s == theta[:, None]).sum(axis=1)
    degenerate = ties == nrep
    prop = (below + 0.5 * ties) / nrep
    prop = np.clip(prop, 0.5 / nrep, 1.0 - 0.5 / nrep)
    z0 = norm_ppf_array(prop)
    z0[degenerate] = 0.0

    def order(z):
        w = z0 + z
        den = 1.0 - accel * w
        with np.errstate(divide="ignore", invalid="ignore"):
            val = norm_cdf(z0 + w / den)
        return np.where(den > 0.0, val, np.where(w > 0.0, 1.0, 0.0))

    order_lo = order(norm_ppf(0.5 * alpha))
    order_hi = order(norm_ppf(1.0 - 0.5 * alpha))

    def interp(o):
        h = (nrep - 1) * o
        i = np.clip(np.floor(h).astype(np.int64), 0, nrep - 1)
        j = np.minimum(i + 1, nrep - 1)
        left = np.take_along_axis(s, i[:, None], axis=1)[:, 0]
        right = np.take_along_axis(s, j[:, None], axis=1)[:, 0]
        return left + (h - i) * (right - left)

    lo = interp(order_lo)
    hi = interp(order_hi)
    lo[degenerate] = theta[degenerate]
    hi[degenerate] = theta[degenerate]
    order_lo[degenerate] = 0.5 * alpha
    order_hi[degenerate] = 1.0 - 0.5 * alpha
    return lo, hi, order_lo, order_hi
