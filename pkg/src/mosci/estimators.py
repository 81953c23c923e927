"""Closed-form confidence intervals for the MOS.

Each estimator exists in two forms: a batch ``*_bounds`` function that
maps an ``(m, k)`` array of category counts to arrays of lower and
upper bounds, and a scalar ``*_ci`` wrapper taking a
:class:`~mosci.model.RatingSample` and returning an
:class:`~mosci.model.Interval`. The simulation harness uses the batch
form; both share one code path.

Only the binomial-proportion estimators (Wilson, Clopper-Pearson,
Jeffreys) clip to the scale. The others are deliberately left
unclamped so that bound violations stay observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .model import EstimatorId, Interval, RatingSample, Scale
from .numerics import DomainError, chi_square_quantile, normal_quantile, student_t_quantile


@dataclass(frozen=True)
class ConfidenceSpec:
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @property
    def gamma(self) -> float:
        return 1.0 - self.alpha


def _counts_matrix(counts) -> np.ndarray:
    c = np.atleast_2d(np.asarray(counts, dtype=np.int64))
    if c.ndim != 2 or c.shape[1] < 2:
        raise DomainError("counts must have shape (m, k) with k >= 2")
    return c


def _moments(counts):
    c = _counts_matrix(counts)
    k = c.shape[1]
    scores = np.arange(1, k + 1, dtype=float)
    n = c.sum(axis=1)
    if (n < 1).any():
        raise DomainError("every sample needs at least one rating")
    mean = (c @ scores) / n
    return c, k, n, mean


def _successes(c, n, k):
    succ = c @ np.arange(k, dtype=np.int64)
    return succ, n * (k - 1)


def _sd(c, n, mean, k):
    if (n < 2).any():
        raise DomainError("standard-deviation based intervals need n >= 2")
    scores = np.arange(1, k + 1, dtype=float)
    dev = (scores[None, :] - mean[:, None]) ** 2
    return np.sqrt((c * dev).sum(axis=1) / (n - 1))


def normal_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    half = normal_quantile(1 - alpha / 2) * _sd(c, n, mean, k) / np.sqrt(n)
    return mean - half, mean + half


def student_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    sd = _sd(c, n, mean, k)
    q = np.empty(n.shape)
    for size in np.unique(n):
        q[n == size] = student_t_quantile(1 - alpha / 2, int(size) - 1)
    half = q * sd / np.sqrt(n)
    return mean - half, mean + half


def simultaneous_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    scores = np.arange(1, k + 1, dtype=float)
    second = (c @ scores**2) / n
    chi = chi_square_quantile(1 - alpha / k, 1)
    # quantile/n scales the plug-in variance; rounding can push it a hair below 0
    half = np.sqrt(chi / n * np.maximum(second - mean**2, 0.0))
    return mean - half, mean + half


def wald_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    p = (mean - 1) / (k - 1)
    # divisor is the number of subjects, not n * (k - 1)
    half = normal_quantile(1 - alpha / 2) * np.sqrt(p * (1 - p) / n) * (k - 1)
    return mean - half, mean + half


def wilson_cc_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    k0 = k - 1
    trials = n * k0
    p = (mean - 1) / k0
    z = normal_quantile(1 - alpha / 2)
    z2 = z * z
    radicand = z2 - 1.0 / trials + 4 * trials * p * (1 - p) + (4 * p - 2)
    d = 1 + z * np.sqrt(np.maximum(radicand, 0.0))
    denom = 2 * (trials + z2)
    lower = np.maximum(1.0, k0 * (2 * trials * p + z2 - d) / denom + 1)
    upper = np.minimum(float(k), k0 * (2 * trials * p + z2 + d) / denom + 1)
    # without successes the corrected lower bound would sit above the scale bottom
    lower = np.where(p <= 0.0, 1.0, lower)
    upper = np.where(p >= 1.0, float(k), upper)
    return lower, upper


def clopper_pearson_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    succ, trials = _successes(c, n, k)
    fail = trials - succ
    # placeholder shape parameters where the closed-form edge case applies
    lo_p = kernels.betaincinv(alpha / 2, np.where(succ == 0, 1, succ), fail + 1)
    hi_p = kernels.betaincinv(1 - alpha / 2, succ + 1, np.where(fail == 0, 1, fail))
    lo_p = np.where(succ == 0, 0.0, lo_p)
    hi_p = np.where(fail == 0, 1.0, hi_p)
    k0 = k - 1
    return np.maximum(1.0, lo_p * k0 + 1), np.minimum(float(k), hi_p * k0 + 1)


def jeffreys_bounds(counts, alpha=0.05):
    c, k, n, mean = _moments(counts)
    succ, trials = _successes(c, n, k)
    a = succ + 0.5
    b = trials - succ + 0.5
    k0 = k - 1
    lower = np.where(succ == 0, 1.0, kernels.betaincinv(alpha / 2, a, b) * k0 + 1)
    upper = np.where(succ == trials, float(k), kernels.betaincinv(1 - alpha / 2, a, b) * k0 + 1)
    return np.maximum(1.0, lower), np.minimum(float(k), upper)


BATCH: dict[EstimatorId, Callable] = {
    EstimatorId.NORM: normal_bounds,
    EstimatorId.STUD: student_bounds,
    EstimatorId.SIMCI: simultaneous_bounds,
    EstimatorId.WALD: wald_bounds,
    EstimatorId.WILSON: wilson_cc_bounds,
    EstimatorId.CP: clopper_pearson_bounds,
    EstimatorId.JEFFREYS: jeffreys_bounds,
}

CLAMPED = frozenset({EstimatorId.WILSON, EstimatorId.CP, EstimatorId.JEFFREYS})


def _single(est: EstimatorId, sample: RatingSample, conf: ConfidenceSpec | None) -> Interval:
    conf = conf or ConfidenceSpec()
    counts = np.asarray(sample.counts, dtype=np.int64)[None, :]
    lo, hi = BATCH[est](counts, conf.alpha)
    point = float((counts[0] @ sample.scale.scores) / sample.n)
    return Interval(float(lo[0]), float(hi[0]), point, est, conf.alpha)


def normal_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    """MOS +/- z * S / sqrt(n) with the unbiased sample deviation S."""
    return _single(EstimatorId.NORM, sample, conf)


def student_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    return _single(EstimatorId.STUD, sample, conf)


def simultaneous_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    """Interval from simultaneous multinomial CIs, chi-square order 1 - alpha/k."""
    return _single(EstimatorId.SIMCI, sample, conf)


def wald_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    return _single(EstimatorId.WALD, sample, conf)


def wilson_cc_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    """Continuity-corrected Wilson interval over n * (k - 1) trials, clipped to [1, k].

    The same ``4p - 2`` correction term appears under both radicals; the
    textbook upper bound uses ``2 - 4p`` instead. As in the textbook
    interval, p = 0 pins the lower bound to 1 and p = 1 the upper to k.
    """
    return _single(EstimatorId.WILSON, sample, conf)


def clopper_pearson_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    return _single(EstimatorId.CP, sample, conf)


def jeffreys_ci(sample: RatingSample, conf: ConfidenceSpec | None = None) -> Interval:
    """Equal-tailed Beta(c + 1/2, N - c + 1/2) credible interval mapped onto [1, k].

    Pinned to 1 when no successes were seen and to k when all were.
    """
    return _single(EstimatorId.JEFFREYS, sample, conf)


def proportion_ci_to_mos_ci(p_interval, scale: Scale, point: float | None = None,
                            estimator: EstimatorId = EstimatorId.CP, alpha: float = 0.05) -> Interval:
    """Affine map of a proportion interval [p0, p1] onto the scale [1, k]."""
    p0, p1 = (float(v) for v in p_interval)
    if not 0.0 <= p0 <= p1 <= 1.0:
        raise DomainError(f"invalid proportion interval [{p0}, {p1}]")
    lo = p0 * scale.k0 + 1
    hi = p1 * scale.k0 + 1
    if point is None:
        point = 0.5 * (lo + hi)
    return Interval(lo, hi, point, estimator, alpha)


def interval(sample: RatingSample, estimator, conf: ConfidenceSpec | None = None,
             boot=None) -> Interval:
    """Compute one estimator's interval; ``boot`` is a BootstrapSpec for ``boot``."""
    est = EstimatorId.parse(estimator)
    if est is EstimatorId.BOOT:
        from .bootstrap import BootstrapSpec, bca_ci

        if boot is None:
            boot = BootstrapSpec(conf=conf or ConfidenceSpec())
        return bca_ci(sample, boot)
    return _single(est, sample, conf)
