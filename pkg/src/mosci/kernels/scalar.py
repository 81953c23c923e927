"""Scalar special functions and per-row loops.

Every function here is plain ``math`` code so that it compiles under
``numba.njit``. When numba is disabled the same source runs as ordinary
Python, which is fine for the scalar API but slow for the batch loops;
the batch entry points in :mod:`mosci.kernels` switch to
:mod:`mosci.kernels.vectorized` in that case.
"""

import math
import os

import numpy as np


def _numba_requested():
    flag = os.environ.get("MOSCI_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    jit = njit(cache=True, nogil=True)
else:

    def jit(func):
        return func


EPS = 1e-16
TINY = 1e-300
SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, refined by one Halley step below.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)


@jit
def norm_cdf(x):
    return 0.5 * math.erfc(-x / SQRT2)


@jit
def _norm_ppf_lower(q):
    # 0 < q <= 0.5
    if q < 0.02425:
        t = math.sqrt(-2.0 * math.log(q))
        x = ((((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5])
             / ((((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0))
    else:
        u = q - 0.5
        r = u * u
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * u
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    for _ in range(2):
        # Halley refinement on the lower tail, where erfc is accurate
        e = 0.5 * math.erfc(-x / SQRT2) - q
        u = e * SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return min(x, 0.0)


@jit
def norm_ppf(q):
    if q <= 0.0:
        return -math.inf
    if q >= 1.0:
        return math.inf
    if q > 0.5:
        # 1 - q is exact here, so f(q) = -f(1 - q) holds bit for bit
        return -_norm_ppf_lower(1.0 - q)
    return _norm_ppf_lower(q)


@jit
def _betacf(x, a, b):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, 20000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h


@jit
def _log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@jit
def betainc(x, a, b):
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lfront = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lfront) * _betacf(x, a, b) / a
    return 1.0 - math.exp(lfront) * _betacf(1.0 - x, b, a) / b


@jit
def betainc_upper(x, a, b):
    """Complement 1 - I_x(a, b) without cancellation."""
    return betainc(1.0 - x, b, a) if 0.0 < x < 1.0 else (1.0 if x <= 0.0 else 0.0)


@jit
def beta_pdf(x, a, b):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - _log_beta(a, b))


@jit
def betaincinv(q, a, b):
    """x with I_x(a, b) = q, by Newton steps kept inside a bisection bracket."""
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0
    lo = 0.0
    hi = 1.0
    x = a / (a + b)
    for _ in range(400):
        f = betainc(x, a, b) - q
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        dens = beta_pdf(x, a, b)
        xn = x - f / dens if dens > 0.0 else -1.0
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * max(x, 1e-300) or hi - lo <= 1e-300:
            return xn
        x = xn
    return x


@jit
def gammainc(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if x <= 0.0:
        return 0.0
    lfront = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(100000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * EPS:
                break
        return total * math.exp(lfront)
    # continued fraction for the upper tail
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, 100000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return 1.0 - math.exp(lfront) * h


@jit
def chi2_pdf(x, df):
    if x <= 0.0:
        return 0.0
    k = 0.5 * df
    return math.exp((k - 1.0) * math.log(x) - 0.5 * x - k * math.log(2.0) - math.lgamma(k))


@jit
def chi2_ppf(q, df):
    k = 0.5 * df
    lo = 0.0
    hi = max(1.0, df)
    while gammainc(k, 0.5 * hi) < q:
        lo = hi
        hi *= 2.0
    x = 0.5 * (lo + hi)
    for _ in range(400):
        f = gammainc(k, 0.5 * x) - q
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        dens = chi2_pdf(x, df)
        xn = x - f / dens if dens > 0.0 else -1.0
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * max(x, 1e-300):
            return xn
        x = xn
    return x


@jit
def student_t_cdf(t, df):
    x = df / (df + t * t)
    tail = 0.5 * betainc(x, 0.5 * df, 0.5)
    return 1.0 - tail if t > 0.0 else tail


@jit
def student_t_ppf(q, df):
    if q == 0.5:
        return 0.0
    upper = q > 0.5
    p = q if upper else 1.0 - q
    # P(|T| <= t) = 2p - 1 = I_y(1/2, df/2) with y = t^2 / (df + t^2)
    two_sided = 2.0 * p - 1.0
    if two_sided < 0.5:
        y = betaincinv(two_sided, 0.5, 0.5 * df)
        t = math.sqrt(df * y / (1.0 - y))
    else:
        x = betaincinv(2.0 * (1.0 - p), 0.5 * df, 0.5)
        t = math.sqrt(df * (1.0 - x) / x)
    return t if upper else -t


@jit
def betaincinv_loop(q, a, b, out):
    for j in range(q.shape[0]):
        out[j] = betaincinv(q[j], a[j], b[j])
    return out


@jit
def betainc_loop(x, a, b, out):
    for j in range(x.shape[0]):
        out[j] = betainc(x[j], a[j], b[j])
    return out


@jit
def _interp_sorted(s, order):
    h = (s.shape[0] - 1) * order
    i = int(math.floor(h))
    if i >= s.shape[0] - 1:
        return s[s.shape[0] - 1]
    if i < 0:
        return s[0]
    return s[i] + (h - i) * (s[i + 1] - s[i])


@jit
def bca_order(z0, accel, z):
    w = z0 + z
    den = 1.0 - accel * w
    if den <= 0.0:
        return 1.0 if w > 0.0 else 0.0
    return norm_cdf(z0 + w / den)


@jit
def bca_bounds_loop(reps, theta, accel, alpha, lo, hi, order_lo, order_hi):
    nrow, nrep = reps.shape
    z_lo = norm_ppf(0.5 * alpha)
    z_hi = norm_ppf(1.0 - 0.5 * alpha)
    for j in range(nrow):
        s = np.sort(reps[j])
        below = 0
        ties = 0
        for v in s:
            if v < theta[j]:
                below += 1
            elif v == theta[j]:
                ties += 1
        if ties == nrep:
            lo[j] = theta[j]
            hi[j] = theta[j]
            order_lo[j] = 0.5 * alpha
            order_hi[j] = 1.0 - 0.5 * alpha
            continue
        prop = (below + 0.5 * ties) / nrep
        prop = min(max(prop, 0.5 / nrep), 1.0 - 0.5 / nrep)
        z0 = norm_ppf(prop)
        a1 = bca_order(z0, accel[j], z_lo)
        a2 = bca_order(z0, accel[j], z_hi)
        order_lo[j] = a1
        order_hi[j] = a2
        lo[j] = _interp_sorted(s, a1)
        hi[j] = _interp_sorted(s, a2)
