"""Bias-corrected and accelerated (BCa) bootstrap interval for the MOS.

Resampling n ratings with replacement from a sample is the same as
drawing category counts from a multinomial with the observed relative
frequencies, which is how replicates are generated here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .estimators import ConfidenceSpec
from .model import EstimatorId, Interval, RatingSample
from .numerics import DomainError, RngStream, normal_quantile

# channel of an RngStream reserved for bootstrap draws; channel 0 draws ratings
BOOT_CHANNEL = 1


@dataclass(frozen=True)
class BootstrapSpec:
    resamples: int = 1000
    conf: ConfidenceSpec = field(default_factory=ConfidenceSpec)
    rng: RngStream = field(default_factory=lambda: RngStream(0))

    def __post_init__(self):
        if int(self.resamples) != self.resamples or self.resamples < 100:
            raise DomainError(f"need at least 100 bootstrap resamples, got {self.resamples!r}")


class BcaResult(NamedTuple):
    interval: Interval
    z0: float
    acceleration: float
    order_lower: float
    order_upper: float


def jackknife_acceleration(counts) -> np.ndarray:
    """Acceleration of the sample mean from its leave-one-out values.

    For the mean, theta_(.) - theta_(u) = (y_u - ybar) / (n - 1), so the
    jackknife skewness ratio reduces to one over the centred ratings.
    """
    c = np.atleast_2d(np.asarray(counts, dtype=float))
    scores = np.arange(1, c.shape[1] + 1, dtype=float)
    n = c.sum(axis=1)
    mean = (c @ scores) / n
    dev = scores[None, :] - mean[:, None]
    num = (c * dev**3).sum(axis=1)
    den = (c * dev**2).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        accel = num / (6.0 * den**1.5)
    return np.where(den > 0, accel, 0.0)


def resample_totals(counts, resamples: int, gen: np.random.Generator) -> np.ndarray:
    """Rating totals of ``resamples`` bootstrap resamples of one sample."""
    c = np.asarray(counts, dtype=np.int64)
    n = int(c.sum())
    draws = gen.multinomial(n, c / n, size=resamples)
    return draws @ np.arange(1, c.size + 1, dtype=np.int64)


def _point(counts) -> np.ndarray:
    c = np.atleast_2d(np.asarray(counts, dtype=np.int64))
    return (c @ np.arange(1, c.shape[1] + 1, dtype=np.int64)) / c.sum(axis=1)


def bca_batch(counts, replicates, alpha: float = 0.05):
    """BCa bounds for many samples given their replicate means.

    ``counts`` is ``(m, k)`` and ``replicates`` is ``(m, B)``. Returns
    ``(lower, upper, order_lower, order_upper)`` arrays of length m.
    """
    c = np.atleast_2d(np.asarray(counts, dtype=np.int64))
    if (c.sum(axis=1) < 2).any():
        raise DomainError("bootstrap intervals need n >= 2")
    return kernels.bca_bounds(np.atleast_2d(replicates), _point(c), jackknife_acceleration(c), alpha)


def bca_from_replicates(sample: RatingSample, replicates, alpha: float = 0.05) -> BcaResult:
    """BCa interval from an explicit set of replicate means.

    Useful when the resampling distribution is known exactly, e.g. by
    enumerating every resample of a tiny sample.
    """
    reps = np.asarray(replicates, dtype=float)[None, :]
    counts = np.asarray(sample.counts)[None, :]
    lo, hi, olo, ohi = bca_batch(counts, reps, alpha)
    theta = float(_point(counts)[0])
    accel = float(jackknife_acceleration(counts)[0])
    below = float((reps < theta).sum() + 0.5 * (reps == theta).sum()) / reps.size
    if (reps == theta).all():
        z0 = 0.0
    else:
        below = min(max(below, 0.5 / reps.size), 1 - 0.5 / reps.size)
        z0 = normal_quantile(below)
    iv = Interval(float(lo[0]), float(hi[0]), theta, EstimatorId.BOOT, alpha)
    return BcaResult(iv, z0, accel, float(olo[0]), float(ohi[0]))


def bca_ci(sample: RatingSample, spec: BootstrapSpec | None = None) -> Interval:
    """BCa bootstrap interval of the MOS.

    A sample whose ratings are all equal gives the zero-width interval at
    that rating. The bounds are resample means, so they never leave [1, k].
    """
    spec = spec or BootstrapSpec()
    if sample.n < 2:
        raise DomainError("bootstrap intervals need n >= 2")
    gen = spec.rng.generator(BOOT_CHANNEL)
    reps = resample_totals(sample.counts, spec.resamples, gen) / sample.n
    return bca_from_replicates(sample, reps, spec.conf.alpha).interval
