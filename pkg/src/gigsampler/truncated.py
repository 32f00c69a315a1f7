"""Rejection-free sampling from left-truncated gamma distributions.

The inverse-CDF route survives arbitrarily extreme truncation because the
tail probability at the truncation point is carried as a log:

    p  = ln P(G > t)                      (p <= 0, finite for finite t)
    Y  ~ Exp(1)
    X  = upper-tail quantile at log-prob -(Y - p)

Shifting a standard exponential by ``-p`` yields an Exp(1) truncated to
``(-p, inf)``, so ``exp(-(Y - p))`` is uniform on (0, exp(p)) and ``X`` is
the gamma conditioned on exceeding ``t`` -- no loop, one draw per variate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import GammaShapeRate, gamma_log_upper_cdf, gamma_quantile_log_upper


@dataclass(frozen=True)
class TruncatedGammaSpec:
    """Gamma(shape, rate) conditioned on exceeding the threshold ``t``."""

    g: GammaShapeRate
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t >= 0):
            raise DomainError(f"truncation point must be finite and >= 0, got {self.t}")


def open_uniform(rng, size=None):
    """Uniform draws on the open interval (0, 1): never exactly 0 or 1."""
    if size is None:
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return u
    u = rng.random(size)
    mask = u == 0.0
    while mask.any():
        u[mask] = rng.random(int(mask.sum()))
        mask = u == 0.0
    return u


def standard_exponential(rng, size=None):
    """Exp(1) draws as -ln(U) with U uniform on the open interval."""
    return -np.log(open_uniform(rng, size))


def sample_truncated_gamma(spec: TruncatedGammaSpec, rng, size=None):
    """Draw from Gamma(a, b) conditioned on exceeding ``spec.t``.

    Returns a float for ``size=None``, else an ndarray.  Works even where
    the linear-scale CDF at ``t`` rounds to 1 (log-tail as negative as the
    float range allows).
    """
    p = gamma_log_upper_cdf(spec.t, spec.g)
    v = standard_exponential(rng, size) - p
    return gamma_quantile_log_upper(-v, spec.g)


def _sample_truncated_gamma_many(g: GammaShapeRate, thresholds, rng):
    """Vectorized variant with a distinct truncation point per draw."""
    t = np.asarray(thresholds, dtype=float)
    p = gamma_log_upper_cdf(t, g)
    v = standard_exponential(rng, t.shape[0]) - p
    return gamma_quantile_log_upper(-v, g)


def sample_truncated_inv_gamma(g: GammaShapeRate, upper: float, rng, size=None):
    """Draw from InvGamma(a, b) conditioned on (0, upper).

    Reciprocal of a gamma draw truncated to exceed ``1/upper``.
    """
    if not upper > 0:
        raise DomainError(f"upper bound must be positive, got {upper}")
    t = 0.0 if math.isinf(upper) else 1.0 / upper
    draw = sample_truncated_gamma(TruncatedGammaSpec(g, t), rng, size)
    return 1.0 / draw
