"""Rating scales, samples, intervals and the MOS point estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .numerics import DomainError


@dataclass(frozen=True)
class Scale:
    """Discrete rating scale with categories 1..k."""

    k: int = 5

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 2:
            raise DomainError(f"scale needs k >= 2 integer points, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def low(self) -> float:
        return 1.0

    @property
    def high(self) -> float:
        return float(self.k)

    @property
    def k0(self) -> int:
        return self.k - 1

    @property
    def scores(self) -> np.ndarray:
        return np.arange(1, self.k + 1, dtype=float)


@dataclass(frozen=True, eq=False)
class RatingSample:
    """Ratings of one test condition, stored canonically as category counts.

    Build from a rating vector with :meth:`from_ratings` or from a
    histogram with :meth:`from_counts`.
    """

    counts: tuple[int, ...]
    scale: Scale = field(default_factory=Scale)

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != self.scale.k:
            raise DomainError(f"expected {self.scale.k} counts, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise DomainError("counts must be non-negative")
        if sum(counts) < 1:
            raise DomainError("a rating sample needs at least one rating")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_ratings(cls, ratings: Iterable[int], scale: Scale | int = 5) -> "RatingSample":
        scale = scale if isinstance(scale, Scale) else Scale(scale)
        values = np.asarray(list(ratings))
        if values.size == 0:
            raise DomainError("a rating sample needs at least one rating")
        if (values != np.round(values)).any():
            raise DomainError("ratings must be integers")
        values = values.astype(np.int64)
        if values.min() < 1 or values.max() > scale.k:
            raise DomainError(f"ratings must lie in 1..{scale.k}")
        counts = np.bincount(values - 1, minlength=scale.k)
        return cls(tuple(counts.tolist()), scale)

    @classmethod
    def from_counts(cls, counts: Sequence[int], scale: Scale | int | None = None) -> "RatingSample":
        if scale is None:
            scale = Scale(len(counts))
        scale = scale if isinstance(scale, Scale) else Scale(scale)
        return cls(tuple(counts), scale)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def ratings(self) -> np.ndarray:
        """Sorted rating vector reconstructed from the counts."""
        return np.repeat(np.arange(1, self.scale.k + 1), self.counts)

    def __eq__(self, other):
        if not isinstance(other, RatingSample):
            return NotImplemented
        return self.counts == other.counts and self.scale == other.scale

    def __hash__(self):
        return hash((self.counts, self.scale))


class EstimatorId(str, Enum):
    NORM = "norm"
    STUD = "stud"
    SIMCI = "simci"
    WALD = "wald"
    CP = "cp"
    WILSON = "wilson"
    JEFFREYS = "jeffreys"
    BOOT = "boot"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, value) -> "EstimatorId":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().rstrip(".")
        for est in cls:
            if key in (est.value, est.label.lower().rstrip(".")):
                return est
        raise DomainError(f"unknown estimator {value!r}")


# row labels of the published comparison table
_LABELS = {
    EstimatorId.NORM: "norm.",
    EstimatorId.STUD: "stud.",
    EstimatorId.SIMCI: "sim.CI",
    EstimatorId.WALD: "Wald",
    EstimatorId.CP: "C-P",
    EstimatorId.WILSON: "Wils.",
    EstimatorId.JEFFREYS: "Jeff.",
    EstimatorId.BOOT: "boot.",
}

ALL_ESTIMATORS = tuple(EstimatorId)


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    point: float
    estimator: EstimatorId
    alpha: float = 0.05

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError("interval bounds must be finite")
        if self.lower > self.upper:
            raise DomainError(f"inverted interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def exceeds(self, scale: Scale) -> bool:
        """True when a bound leaves the rating scale."""
        return self.lower < scale.low or self.upper > scale.high


def mos(sample: RatingSample) -> float:
    """Mean opinion score, the plain average of the ratings."""
    total = sum(i * c for i, c in enumerate(sample.counts, start=1))
    return total / sample.n


def success_count(sample: RatingSample) -> tuple[int, int]:
    """Binomial view of a sample: (sum of y - 1, n * (k - 1))."""
    c = sum((i - 1) * cnt for i, cnt in enumerate(sample.counts, start=1))
    return c, sample.n * sample.scale.k0


def sample_stats(sample: RatingSample) -> tuple[float, float]:
    """Mean and unbiased standard deviation; needs n >= 2."""
    n = sample.n
    if n < 2:
        raise DomainError("standard deviation needs at least two ratings")
    mean = mos(sample)
    ss = sum(c * (i - mean) ** 2 for i, c in enumerate(sample.counts, start=1))
    return mean, math.sqrt(ss / (n - 1))
