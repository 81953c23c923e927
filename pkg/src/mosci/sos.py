"""SOS-parameter fit and estimator recommendation.

The SOS hypothesis ties the rating variance of a test condition to its
MOS through a single parameter a::

    S^2(mu) = a * (-mu^2 + (k + 1) * mu - k)

A shifted binomial rating distribution has a = 1 / (k - 1); values
well below that mean ratings cluster tighter than binomial ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .model import EstimatorId, Scale
from .numerics import DomainError


class FitError(DomainError):
    """No condition carries information about a."""


@dataclass(frozen=True)
class SosEstimate:
    a: float
    conditions: tuple[tuple[float, float], ...]
    residual: float
    method: str = "sd"
    used: int = 0


def sos_curve(mu, scale: Scale):
    """-mu^2 + (k + 1) mu - k, the variance shape at a = 1."""
    mu = np.asarray(mu, dtype=float)
    return -(mu**2) + (scale.k + 1) * mu - scale.k


def sos_fit(conditions: Sequence[tuple[float, float]], scale: Scale, method: str = "sd") -> SosEstimate:
    """Least-squares fit of a through the origin.

    ``conditions`` holds (MOS, variance) pairs. With ``method="sd"`` the
    residuals are taken on the standard deviation, the usual way SOS
    plots are fitted: sqrt(a) = sum(S * sqrt(v)) / sum(v). With
    ``method="variance"`` they are taken on S^2: a = sum(S^2 v) / sum(v^2).
    Conditions at the scale edges (v = 0) carry no information and are
    skipped.
    """
    pairs = [(float(m), float(v)) for m, v in conditions]
    if not pairs:
        raise FitError("no conditions to fit")
    mus = np.array([p[0] for p in pairs])
    var = np.array([p[1] for p in pairs])
    if (mus < 1).any() or (mus > scale.k).any():
        raise DomainError(f"MOS values must lie in [1, {scale.k}]")
    if (var < 0).any():
        raise DomainError("variances must be non-negative")
    v = sos_curve(mus, scale)
    keep = v > 1e-12
    if not keep.any():
        raise FitError("every condition sits at a scale edge; a is undetermined")
    v, var = v[keep], var[keep]
    if method == "sd":
        root = float(np.sum(np.sqrt(var * v)) / np.sum(v))
        a = root * root
        residual = float(np.sum((np.sqrt(var) - root * np.sqrt(v)) ** 2))
    elif method == "variance":
        a = float(np.sum(var * v) / np.sum(v * v))
        residual = float(np.sum((var - a * v) ** 2))
    else:
        raise ValueError(f"unknown fit method {method!r}")
    return SosEstimate(a, tuple(pairs), residual, method, int(keep.sum()))


class Verdict(str, Enum):
    BINOMIAL_EXACT = "binomial_exact"
    NARROW_OK = "narrow_ok"
    CHECK_DESIGN = "check_design"


@dataclass(frozen=True)
class Recommendation:
    verdict: Verdict
    rationale: str
    estimators: tuple[EstimatorId, ...]
    conservative: tuple[EstimatorId, ...] = ()


BINOMIAL_TRIO = (EstimatorId.CP, EstimatorId.WILSON, EstimatorId.JEFFREYS)
LOW_VARIANCE_THRESHOLD = 0.1


def recommend(a: float, scale: Scale, n: int | None = None) -> Recommendation:
    """Pick interval estimators from the fitted SOS parameter.

    Breakpoints are strict: a = 1 / (k - 1) still counts as binomial and
    a = 0.1 is not yet low variance.
    """
    if not a >= 0 or math.isinf(a):
        raise DomainError(f"SOS parameter must be a finite non-negative number, got {a!r}")
    binomial_a = 1.0 / scale.k0
    subjects = f" with n={n} subjects" if n else ""
    if a > binomial_a:
        return Recommendation(
            Verdict.CHECK_DESIGN,
            f"a={a:.3f} exceeds the binomial value 1/(k-1)={binomial_a:.3f}{subjects}: "
            "rating diversity is higher than any binomial model allows, so check the test "
            "design for hidden influence factors. Binomial-proportion intervals are the least "
            "bad option but may under-cover.",
            BINOMIAL_TRIO,
        )
    if a < LOW_VARIANCE_THRESHOLD:
        return Recommendation(
            Verdict.NARROW_OK,
            f"a={a:.3f} is below {LOW_VARIANCE_THRESHOLD}{subjects}: low rating variance. "
            "Bootstrap or normal/Student intervals give narrower CIs at some loss of coverage; "
            "the binomial-proportion intervals stay exact but conservative. Adding subjects "
            "is the most effective way to shrink intervals.",
            (EstimatorId.BOOT, EstimatorId.NORM, EstimatorId.STUD),
            BINOMIAL_TRIO,
        )
    return Recommendation(
        Verdict.BINOMIAL_EXACT,
        f"a={a:.3f} is within the binomial bound 1/(k-1)={binomial_a:.3f}{subjects}: use the "
        "binomial-proportion intervals (Clopper-Pearson, Wilson, Jeffreys), which are "
        "conservative but keep nominal coverage and never leave the scale.",
        BINOMIAL_TRIO,
    )
