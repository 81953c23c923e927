"""Hot numeric kernels.

The batch entry points dispatch to numba-compiled loops when numba is
available and ``MOSCI_DISABLE_NUMBA`` is unset, otherwise to the
vectorized numpy implementations. Both paths return identical results
up to floating-point rounding.
"""

import numpy as np

from . import scalar, vectorized
from .scalar import NUMBA_ENABLED

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def betainc(x, a, b):
    x, a, b = (np.ascontiguousarray(v, dtype=float) for v in np.broadcast_arrays(x, a, b))
    if NUMBA_ENABLED:
        shape = x.shape
        out = np.empty(x.size)
        scalar.betainc_loop(x.ravel(), a.ravel(), b.ravel(), out)
        return out.reshape(shape)
    return vectorized.betainc(x, a, b)


def betaincinv(q, a, b):
    """Elementwise beta quantiles; duplicate (q, a, b) triples are solved once."""
    q, a, b = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(q, a, b))
    shape = q.shape
    keys = np.stack([q.ravel(), a.ravel(), b.ravel()], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    uq, ua, ub = (np.ascontiguousarray(uniq[:, j]) for j in range(3))
    if NUMBA_ENABLED:
        sol = scalar.betaincinv_loop(uq, ua, ub, np.empty(uq.shape[0]))
    else:
        sol = vectorized.betaincinv(uq, ua, ub)
    return sol[inverse.ravel()].reshape(shape)


def bca_bounds(reps, theta, accel, alpha):
    """BCa percentile bounds for each row of a replicate matrix.

    Returns ``(lower, upper, order_lower, order_upper)``.
    """
    reps = np.ascontiguousarray(reps, dtype=float)
    theta = np.ascontiguousarray(theta, dtype=float)
    accel = np.ascontiguousarray(accel, dtype=float)
    if NUMBA_ENABLED:
        n = reps.shape[0]
        lo, hi, olo, ohi = (np.empty(n) for _ in range(4))
        scalar.bca_bounds_loop(reps, theta, accel, float(alpha), lo, hi, olo, ohi)
        return lo, hi, olo, ohi
    return vectorized.bca_bounds(reps, theta, accel, float(alpha))


__all__ = ["BACKEND", "NUMBA_ENABLED", "betainc", "betaincinv", "bca_bounds", "scalar", "vectorized"]
