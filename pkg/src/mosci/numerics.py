"""Quantile functions, CDFs and seeded samplers.

Quantiles are found by bracketed Newton iteration on the CDFs in
:mod:`mosci.kernels.scalar`, so results do not depend on the platform
math library beyond ``erfc`` and ``lgamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernels import scalar as _k


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


def _check_open_unit(q: float, name: str = "q") -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {q!r}")
    return q


def _check_df(df) -> float:
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df!r}")
    return float(df)


def normal_cdf(x: float) -> float:
    return _k.norm_cdf(float(x))


def normal_quantile(q: float) -> float:
    """Standard normal quantile, z with Phi(z) = q."""
    return _k.norm_ppf(_check_open_unit(q))


def student_t_cdf(t: float, df: int) -> float:
    return _k.student_t_cdf(float(t), _check_df(df))


def student_t_quantile(q: float, df: int) -> float:
    return _k.student_t_ppf(_check_open_unit(q), _check_df(df))


def chi_square_cdf(x: float, df: int) -> float:
    return _k.gammainc(0.5 * _check_df(df), 0.5 * max(float(x), 0.0))


def chi_square_quantile(q: float, df: int) -> float:
    return _k.chi2_ppf(_check_open_unit(q), _check_df(df))


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b); arguments outside [0, 1] are clamped to the support."""
    if not (a > 0 and b > 0):
        raise DomainError(f"beta parameters must be positive, got a={a!r}, b={b!r}")
    return _k.betainc(float(x), float(a), float(b))


def beta_quantile(q: float, a: float, b: float) -> float:
    """Inverse of :func:`regularized_incomplete_beta` in its first argument.

    ``q`` may be 0 or 1, which map to exactly 0 and 1.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"beta parameters must be positive, got a={a!r}, b={b!r}")
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q!r}")
    return _k.betaincinv(q, float(a), float(b))


@dataclass(frozen=True)
class RngStream:
    """Descriptor of an independent random stream keyed by (seed, x, i).

    ``x`` is the test-condition index and ``i`` the simulation run. The
    descriptor is immutable; :meth:`generator` builds a fresh numpy
    Generator each time, so equal descriptors yield equal draws.
    """

    seed: int
    x: int = 0
    i: int = 0

    def generator(self, channel: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.seed) & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(int(self.x), int(self.i), int(channel)),
        )
        return np.random.Generator(np.random.PCG64(seq))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_probs(probs: Sequence[float]) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("probs must be a non-empty 1-d sequence")
    if (p < 0).any() or (p > 1).any():
        raise DomainError("probabilities must lie in [0, 1]")
    if abs(p.sum() - 1.0) > 1e-12:
        raise DomainError(f"probabilities must sum to 1, got {p.sum()!r}")
    return p


def sample_categorical(probs: Sequence[float], rng, size: int | None = None):
    """Draw 1-based category indices with the given probabilities.

    Returns a single int when ``size`` is None, else an int array.
    Categories with zero probability are never drawn.
    """
    p = _check_probs(probs)
    gen = _as_generator(rng)
    cdf = np.cumsum(p)
    last = int(np.flatnonzero(p)[-1])
    cdf[last:] = np.inf
    u = gen.random(1 if size is None else size)
    idx = np.searchsorted(cdf, u, side="right") + 1
    return int(idx[0]) if size is None else idx.astype(np.int64)


def multinomial_log_pmf(counts: Sequence[int], probs: Sequence[float]) -> float:
    """Log probability of the category counts under a multinomial law."""
    c = np.asarray(counts)
    p = _check_probs(probs)
    if c.shape != p.shape:
        raise DomainError("counts and probs must have the same length")
    if (c < 0).any() or (np.asarray(c, dtype=float) != np.round(c)).any():
        raise DomainError("counts must be non-negative integers")
    c = c.astype(np.int64)
    if ((c > 0) & (p == 0)).any():
        return -math.inf
    n = int(c.sum())
    out = math.lgamma(n + 1)
    for cj, pj in zip(c.tolist(), p.tolist()):
        out -= math.lgamma(cj + 1)
        if cj:
            out += cj * math.log(pj)
    return out
