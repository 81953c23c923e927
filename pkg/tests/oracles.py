"""Independent reference computations used only by the tests.

Nothing here calls into ``mosci``: quantiles come from bracketed root
finding on CDFs obtained by numerically integrating the densities, and
the BCa reference works from an explicitly enumerated resample set.
"""

import itertools
import math

import numpy as np
from scipy import integrate, optimize


def _norm_pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def normal_cdf(x):
    # integrate outward from the median to keep quad on a finite range
    val, _ = integrate.quad(_norm_pdf, 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 0.5 + val


def t_cdf(t, df):
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)

    def pdf(u):
        return math.exp(logc - (df + 1) / 2 * math.log1p(u * u / df))

    val, _ = integrate.quad(pdf, 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=400)
    return 0.5 + val


def chi2_cdf(x, df):
    # substitute x = u^2 so the integrand is smooth at the origin
    logc = -(df / 2) * math.log(2) - math.lgamma(df / 2)

    def integrand(u):
        if u == 0.0:
            return 2.0 * math.exp(logc) if df == 1 else 0.0
        return 2.0 * math.exp(logc + (df - 1) * math.log(u) - 0.5 * u * u)

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(x), epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def beta_cdf(x, a, b):
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    lb = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if x <= 0.5:
        # algebraic weight carries the x^(a-1) endpoint behaviour
        f = lambda t: math.exp((b - 1) * math.log1p(-t) - lb)
        val, _ = integrate.quad(f, 0.0, x, weight="alg", wvar=(a - 1, 0.0), epsabs=1e-15, epsrel=1e-13, limit=400)
        return val
    f = lambda t: math.exp((a - 1) * math.log(t) - lb)
    val, _ = integrate.quad(f, x, 1.0, weight="alg", wvar=(0.0, b - 1), epsabs=1e-15, epsrel=1e-13, limit=400)
    return 1.0 - val


def invert(cdf, q, lo, hi):
    """Bracketed root of cdf(x) = q."""
    while cdf(hi) < q:
        hi *= 2
    while cdf(lo) > q:
        lo = lo * 2 if lo < 0 else lo - 1
    return optimize.brentq(lambda x: cdf(x) - q, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def normal_quantile(q):
    return invert(normal_cdf, q, -10.0, 10.0)


def t_quantile(q, df):
    return invert(lambda x: t_cdf(x, df), q, -10.0, 10.0)


def chi2_quantile(q, df):
    return invert(lambda x: chi2_cdf(x, df), q, 0.0, max(10.0, 4.0 * df))


def beta_quantile(q, a, b):
    return optimize.brentq(lambda x: beta_cdf(x, a, b) - q, 0.0, 1.0, xtol=1e-15, rtol=1e-15, maxiter=500)


def wilson_cc_textbook(succ, trials, z):
    """Newcombe's continuity-corrected Wilson interval for a proportion."""
    p = succ / trials
    denom = 2 * (trials + z * z)
    if succ == 0:
        lower = 0.0
    else:
        rad = z * z - 2 - 1 / trials + 4 * p * (trials * (1 - p) + 1)
        lower = max(0.0, (2 * trials * p + z * z - 1 - z * math.sqrt(rad)) / denom)
    if succ == trials:
        upper = 1.0
    else:
        rad = z * z + 2 - 1 / trials + 4 * p * (trials * (1 - p) - 1)
        upper = min(1.0, (2 * trials * p + z * z + 1 + z * math.sqrt(rad)) / denom)
    return lower, upper


def enumerate_resample_means(ratings):
    """All n^n equally likely bootstrap resamples of a tiny sample."""
    n = len(ratings)
    return np.array([sum(c) / n for c in itertools.product(ratings, repeat=n)])


def bca_reference(ratings, replicates, alpha):
    """Textbook BCa with a literal leave-one-out jackknife.

    Returns (z0, acceleration, order_lower, order_upper, lower, upper).
    """
    from scipy.stats import norm

    y = np.asarray(ratings, dtype=float)
    n = y.size
    theta = y.mean()
    reps = np.sort(np.asarray(replicates, dtype=float))
    prop = (np.sum(reps < theta) + 0.5 * np.sum(reps == theta)) / reps.size
    z0 = norm.ppf(prop)
    jack = np.array([np.delete(y, j).mean() for j in range(n)])
    d = jack.mean() - jack
    den = 6.0 * np.sum(d**2) ** 1.5
    accel = np.sum(d**3) / den if den > 0 else 0.0
    orders = []
    for z in (norm.ppf(alpha / 2), norm.ppf(1 - alpha / 2)):
        orders.append(norm.cdf(z0 + (z0 + z) / (1 - accel * (z0 + z))))
    bounds = []
    for o in orders:
        h = (reps.size - 1) * o
        lo = int(math.floor(h))
        hi = min(lo + 1, reps.size - 1)
        bounds.append(reps[lo] + (h - lo) * (reps[hi] - reps[lo]))
    return z0, accel, orders[0], orders[1], bounds[0], bounds[1]


def multinomial_pmf(counts, probs):
    n = sum(counts)
    val = math.factorial(n)
    for c, p in zip(counts, probs):
        val = val / math.factorial(c) * p**c
    return val
