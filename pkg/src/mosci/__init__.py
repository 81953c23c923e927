"""Confidence intervals for Mean Opinion Scores on discrete rating scales."""

from .bootstrap import BootstrapSpec, bca_ci
from .estimators import (
    ConfidenceSpec,
    clopper_pearson_ci,
    interval,
    jeffreys_ci,
    normal_ci,
    proportion_ci_to_mos_ci,
    simultaneous_ci,
    student_ci,
    wald_ci,
    wilson_cc_ci,
)
from .model import EstimatorId, Interval, RatingSample, Scale, mos, sample_stats, success_count
from .numerics import DomainError, RngStream
from .simharness import ScenarioSpec, aggregate, run_study, sweep_subjects
from .sos import recommend, sos_fit

__version__ = "0.1.0"

__all__ = [
    "BootstrapSpec", "ConfidenceSpec", "DomainError", "EstimatorId", "Interval", "RatingSample",
    "RngStream", "Scale", "ScenarioSpec", "aggregate", "bca_ci", "clopper_pearson_ci", "interval",
    "jeffreys_ci", "mos", "normal_ci", "proportion_ci_to_mos_ci", "recommend", "run_study",
    "sample_stats", "simultaneous_ci", "sos_fit", "student_ci", "success_count", "sweep_subjects",
    "wald_ci", "wilson_cc_ci",
]
