"""Monte-Carlo evaluation of the interval estimators.

A study draws ``n`` ratings for each of ``m`` test conditions with known
means, repeats this ``r`` times, and records per cell (x, i) whether
each estimator's interval covers the true mean, whether it leaves the
rating scale, and its width. :func:`aggregate` condenses the grid into
the test-condition perspective (marginals over runs) and the QoE-study
perspective (marginals over conditions).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import bootstrap
from .bootstrap import BootstrapSpec
from .estimators import BATCH, ConfidenceSpec
from .model import EstimatorId, Scale
from .numerics import DomainError, RngStream, sample_categorical


class ScenarioKind(str, Enum):
    BINOMIAL = "binomial"
    LOW_VARIANCE = "low_variance"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ScenarioSpec:
    """Parametric family of rating distributions over a grid of true means.

    ``m``, ``low`` and ``high`` default per kind: the binomial grid spans
    [1, k], the low-variance grid [2, k - 1], and the uniform scenario is
    a single condition at (k + 1) / 2.
    """

    kind: ScenarioKind = ScenarioKind.BINOMIAL
    scale: Scale = field(default_factory=Scale)
    n: int = 20
    m: int | None = None
    r: int = 200
    seed: int = 0
    low: float | None = None
    high: float | None = None

    def __post_init__(self):
        kind = ScenarioKind(self.kind)
        object.__setattr__(self, "kind", kind)
        k = self.scale.k
        if kind is ScenarioKind.LOW_VARIANCE and k < 4:
            raise DomainError("the low-variance scenario needs k >= 4")
        defaults = {
            ScenarioKind.BINOMIAL: (101, 1.0, float(k)),
            ScenarioKind.LOW_VARIANCE: (101, 2.0, float(k - 1)),
            ScenarioKind.UNIFORM: (1, (k + 1) / 2, (k + 1) / 2),
        }[kind]
        for name, default in zip(("m", "low", "high"), defaults):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)
        if self.m < 1 or self.r < 1:
            raise DomainError("m and r must be positive")
        if self.n < 1:
            raise DomainError("n must be positive")
        if kind is ScenarioKind.UNIFORM:
            return
        if not 1 <= self.low < self.high <= k:
            raise DomainError(f"grid bounds must satisfy 1 <= L < H <= k, got [{self.low}, {self.high}]")
        if kind is ScenarioKind.LOW_VARIANCE and not 2 <= self.low < self.high <= k - 1:
            raise DomainError("low-variance grid must stay within [2, k - 1]")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value, "k": self.scale.k, "n": self.n, "m": self.m,
            "r": self.r, "seed": self.seed, "low": self.low, "high": self.high,
        }


def mean_grid(spec: ScenarioSpec) -> np.ndarray:
    """True means mu_1..mu_m, evenly spaced with mu_1 = L and mu_m = H."""
    if spec.kind is ScenarioKind.UNIFORM:
        return np.full(spec.m, (spec.scale.k + 1) / 2)
    if spec.m == 1:
        return np.array([float(spec.low)])
    x = np.arange(spec.m)
    return spec.low + x / (spec.m - 1) * (spec.high - spec.low)


def _shifted_binomial(trials: int, p: float, shift: int, k: int) -> np.ndarray:
    probs = np.zeros(k)
    for j in range(trials + 1):
        probs[shift + j - 1] = math.comb(trials, j) * p**j * (1 - p) ** (trials - j)
    return probs


def binomial_scenario_dist(mu: float, scale: Scale) -> np.ndarray:
    """Category probabilities of Bino(k - 1, p) + 1 with mean ``mu``."""
    if not 1 <= mu <= scale.k:
        raise DomainError(f"mean {mu} outside [1, {scale.k}]")
    return _shifted_binomial(scale.k0, (mu - 1) / scale.k0, 1, scale.k)


def low_variance_scenario_dist(mu: float, scale: Scale) -> np.ndarray:
    """Bino(k - 3, p) + 2: ratings avoid both ends of the scale."""
    if scale.k < 4:
        raise DomainError("the low-variance family needs k >= 4")
    if not 2 <= mu <= scale.k - 1:
        raise DomainError(f"mean {mu} outside [2, {scale.k - 1}]")
    return _shifted_binomial(scale.k - 3, (mu - 2) / (scale.k - 3), 2, scale.k)


def uniform_scenario_dist(scale: Scale) -> np.ndarray:
    return np.full(scale.k, 1.0 / scale.k)


def scenario_dist(spec: ScenarioSpec, mu: float) -> np.ndarray:
    if spec.kind is ScenarioKind.BINOMIAL:
        return binomial_scenario_dist(mu, spec.scale)
    if spec.kind is ScenarioKind.LOW_VARIANCE:
        return low_variance_scenario_dist(mu, spec.scale)
    return uniform_scenario_dist(spec.scale)


@dataclass(eq=False)
class StudyResult:
    """Per-cell intervals of a study. Arrays are indexed ``[x, i]``."""

    spec: ScenarioSpec
    mus: np.ndarray
    counts: np.ndarray
    lower: dict[EstimatorId, np.ndarray]
    upper: dict[EstimatorId, np.ndarray]
    alpha: float = 0.05

    @property
    def estimators(self) -> list[EstimatorId]:
        return list(self.lower)

    @property
    def mos(self) -> np.ndarray:
        k = self.counts.shape[-1]
        return (self.counts @ np.arange(1, k + 1)) / self.counts.sum(axis=-1)

    def coverage(self, est) -> np.ndarray:
        est = EstimatorId.parse(est)
        mu = self.mus[:, None]
        return ((self.lower[est] <= mu) & (mu <= self.upper[est])).astype(np.int8)

    def outliers(self, est) -> np.ndarray:
        est = EstimatorId.parse(est)
        k = self.spec.scale.k
        return ((self.lower[est] < 1) | (self.upper[est] > k)).astype(np.int8)

    def widths(self, est) -> np.ndarray:
        est = EstimatorId.parse(est)
        return self.upper[est] - self.lower[est]

    def __eq__(self, other):
        if not isinstance(other, StudyResult):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.alpha == other.alpha
            and self.estimators == other.estimators
            and np.array_equal(self.mus, other.mus)
            and np.array_equal(self.counts, other.counts)
            and all(np.array_equal(self.lower[e], other.lower[e]) for e in self.lower)
            and all(np.array_equal(self.upper[e], other.upper[e]) for e in self.upper)
        )

    def tobytes(self) -> bytes:
        parts = [self.mus.tobytes(), self.counts.tobytes()]
        for est in self.estimators:
            parts += [est.value.encode(), self.lower[est].tobytes(), self.upper[est].tobytes()]
        return b"".join(parts)


def _sample_condition(spec: ScenarioSpec, x: int, probs: np.ndarray) -> np.ndarray:
    counts = np.empty((spec.r, spec.scale.k), dtype=np.int64)
    for i in range(spec.r):
        gen = RngStream(spec.seed, x, i).generator()
        ratings = sample_categorical(probs, gen, size=spec.n)
        counts[i] = np.bincount(ratings - 1, minlength=spec.scale.k)
    return counts


def _boot_condition(spec: ScenarioSpec, x: int, counts: np.ndarray, boot: BootstrapSpec):
    reps = np.empty((spec.r, boot.resamples))
    for i in range(spec.r):
        gen = RngStream(spec.seed, x, i).generator(bootstrap.BOOT_CHANNEL)
        reps[i] = bootstrap.resample_totals(counts[i], boot.resamples, gen) / spec.n
    lo, hi, _, _ = bootstrap.bca_batch(counts, reps, boot.conf.alpha)
    return lo, hi


def run_study(spec: ScenarioSpec, estimators: Iterable = tuple(EstimatorId),
              boot: BootstrapSpec | None = None, conf: ConfidenceSpec | None = None,
              workers: int = 1) -> StudyResult:
    """Simulate every cell (x, i) of the grid and compute all intervals.

    Cell (x, i) draws its ratings from ``RngStream(seed, x, i)`` and its
    bootstrap resamples from a separate channel of the same stream, so
    the result does not depend on ``workers`` or on which estimators
    are requested. The confidence level comes from ``conf``, falling
    back to ``boot.conf``; ``boot.rng`` is not used here.
    """
    ests = [EstimatorId.parse(e) for e in estimators]
    if not ests:
        raise DomainError("no estimators requested")
    if boot is None:
        boot = BootstrapSpec(conf=conf or ConfidenceSpec())
    conf = conf or boot.conf
    if boot.conf != conf:
        boot = BootstrapSpec(boot.resamples, conf, boot.rng)

    mus = mean_grid(spec)
    dists = [scenario_dist(spec, mu) for mu in mus]
    xs = range(spec.m)

    def run(fn, items):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(fn, items))
        return [fn(item) for item in items]

    counts = np.stack(run(lambda x: _sample_condition(spec, x, dists[x]), xs))
    flat = counts.reshape(-1, spec.scale.k)
    lower, upper = {}, {}
    for est in ests:
        if est is EstimatorId.BOOT:
            if spec.n < 2:
                raise DomainError("bootstrap intervals need n >= 2")
            parts = run(lambda x: _boot_condition(spec, x, counts[x], boot), xs)
            lower[est] = np.stack([p[0] for p in parts])
            upper[est] = np.stack([p[1] for p in parts])
        else:
            lo, hi = BATCH[est](flat, conf.alpha)
            lower[est] = lo.reshape(spec.m, spec.r)
            upper[est] = hi.reshape(spec.m, spec.r)
    return StudyResult(spec, mus, counts, lower, upper, conf.alpha)


@dataclass(frozen=True)
class BoxplotStats:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {
            "median": self.median, "q1": self.q1, "q3": self.q3,
            "whisker_low": self.whisker_low, "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }


def boxplot_stats(values: Sequence[float]) -> BoxplotStats:
    """Tukey boxplot: whiskers reach the most extreme points within 1.5 IQR."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DomainError("boxplot of an empty list")
    q1, median, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outside = v[(v < lo_fence) | (v > hi_fence)]
    return BoxplotStats(
        float(median), float(q1), float(q3),
        float(inside.min()), float(inside.max()),
        tuple(float(o) for o in np.sort(outside)),
    )


MARGINALS = ("C_x", "C_i", "O_x", "O_i", "W_x", "W_i")


@dataclass
class EstimatorMetrics:
    """Coverage, outlier ratio and width of one estimator in both perspectives."""

    coverage_x: np.ndarray
    coverage_i: np.ndarray
    outlier_x: np.ndarray
    outlier_i: np.ndarray
    width_x: np.ndarray
    width_i: np.ndarray
    coverage: float
    outlier: float
    width: float
    coverage_x_min: float
    coverage_i_min: float
    coverage_x_outliers: float
    coverage_i_outliers: float
    boxplots: dict[str, BoxplotStats]

    def marginal(self, name: str) -> np.ndarray:
        return {
            "C_x": self.coverage_x, "C_i": self.coverage_i,
            "O_x": self.outlier_x, "O_i": self.outlier_i,
            "W_x": self.width_x, "W_i": self.width_i,
        }[name]

    def table_row(self) -> dict:
        return {
            "C": self.coverage, "C_x_o": self.coverage_x_outliers, "C_x_m": self.coverage_x_min,
            "C_i_o": self.coverage_i_outliers, "C_i_m": self.coverage_i_min,
            "O": self.outlier, "W": self.width,
        }

    def __eq__(self, other):
        if not isinstance(other, EstimatorMetrics):
            return NotImplemented
        return (
            all(np.array_equal(self.marginal(m), other.marginal(m)) for m in MARGINALS)
            and self.table_row() == other.table_row()
            and self.boxplots == other.boxplots
        )


def aggregate_grid(cover, outlier, width) -> EstimatorMetrics:
    """Marginals and grand means of (m, r) indicator and width grids."""
    cover = np.asarray(cover, dtype=float)
    outlier = np.asarray(outlier, dtype=float)
    width = np.asarray(width, dtype=float)
    cx, ci = cover.mean(axis=1), cover.mean(axis=0)
    ox, oi = outlier.mean(axis=1), outlier.mean(axis=0)
    wx, wi = width.mean(axis=1), width.mean(axis=0)
    boxes = {name: boxplot_stats(arr) for name, arr in zip(MARGINALS, (cx, ci, ox, oi, wx, wi))}
    return EstimatorMetrics(
        coverage_x=cx, coverage_i=ci, outlier_x=ox, outlier_i=oi, width_x=wx, width_i=wi,
        coverage=float(cx.mean()), outlier=float(ox.mean()), width=float(wx.mean()),
        coverage_x_min=float(cx.min()), coverage_i_min=float(ci.min()),
        coverage_x_outliers=len(boxes["C_x"].outliers) / cx.size,
        coverage_i_outliers=len(boxes["C_i"].outliers) / ci.size,
        boxplots=boxes,
    )


@dataclass
class MetricsReport:
    config: dict
    metrics: dict[EstimatorId, EstimatorMetrics]

    def __getitem__(self, est) -> EstimatorMetrics:
        return self.metrics[EstimatorId.parse(est)]

    def table(self) -> list[dict]:
        return [{"estimator": est.value, "label": est.label, **m.table_row()} for est, m in self.metrics.items()]

    def __eq__(self, other):
        if not isinstance(other, MetricsReport):
            return NotImplemented
        return self.config == other.config and self.metrics == other.metrics


def aggregate(result: StudyResult, config: dict | None = None) -> MetricsReport:
    if config is None:
        config = {**result.spec.as_dict(), "alpha": result.alpha}
    metrics = {
        est: aggregate_grid(result.coverage(est), result.outliers(est), result.widths(est))
        for est in result.estimators
    }
    return MetricsReport(config, metrics)


def sweep_subjects(spec: ScenarioSpec, n_values: Sequence[int], estimators: Iterable = tuple(EstimatorId),
                   boot: BootstrapSpec | None = None, conf: ConfidenceSpec | None = None,
                   workers: int = 1) -> list[dict]:
    """Grand coverage, width and outlier ratio per estimator as n varies."""
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise DomainError("n_values must not be empty")
    if min(n_values) < 2:
        raise DomainError("every subject count must be at least 2")
    ests = [EstimatorId.parse(e) for e in estimators]
    rows = []
    for n in n_values:
        sub = ScenarioSpec(spec.kind, spec.scale, n, spec.m, spec.r, spec.seed, spec.low, spec.high)
        report = aggregate(run_study(sub, ests, boot, conf, workers))
        for est in ests:
            m = report[est]
            rows.append({"estimator": est.value, "n": n, "C": m.coverage, "W": m.width, "O": m.outlier})
    return rows
