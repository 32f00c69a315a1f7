"""Piecewise-exponential proposal construction for the quasi-density.

The target is f(y) = h(y) * F(y) with h the Exp(beta/2) density and F the
CDF of InvGamma(-lam, beta/2).  Replacing F by the step function that takes
the value F(k_{i+1}) on each segment [k_i, k_{i+1}) yields a dominating
piecewise-exponential proposal; the segment tables built here (segment CDF
values, exponential masses, mixture weights) are everything the rejection
sampler needs at draw time.

Cutoff selection comes in two flavors:

* by target rejection rate -- iteratively pull the leftmost piece of the
  proposal down by (1 - eps/2) until it holds at most an eps/2 share of the
  envelope mass, placing one cutoff per pulldown;
* by fixed count -- binary search on the rate, exploiting that the produced
  count is a non-increasing step function of the rate.

One float-precision concession: when the shape -lam is very close to zero,
F is so heavy-tailed that the early quantiles F^{-1}(alpha) overflow the
float range entirely (the underlying gamma quantile underflows to zero).
Such candidates cannot be stored.  Omitting an overflowed candidate is
exactly safe: the segment it would bound lies above the largest finite
candidate, whose own exponential tail already underflows to zero, so the
omitted segment carries mass exactly 0 in double precision.  Every finite
candidate is kept -- including astronomically large ones whose segments
have zero mass -- because their step values still shape the envelope over
the region that does get sampled.  The loop state advances exactly as
written either way.

The (rare) omissions create two notions of "number of cutoff points":

* the number of pulldown iterations the construction performed (its
  complexity); this is what ``count_cutoffs_curve`` reports, and it is a
  non-increasing step function of the rate;
* the length of the stored cutoff vector; this is what
  ``find_cutoffs_by_rate`` returns and what ``find_cutoffs_by_count``
  targets.  The two coincide except in the shape-near-zero corner, where
  the stored length is only coarsely monotone in the rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ConvergenceError,
    CutoffCapExceededError,
    CutoffCountUnattainableError,
    DomainError,
)
from .special import (
    GammaShapeRate,
    inv_gamma_log_cdf,
    inv_gamma_quantile_from_log,
)

DEFAULT_MAX_CUTOFFS = 1_000_000
DEFAULT_COUNT_SEARCH_THRESHOLD = 1e-6

# Chunk sizes for prefetching cutoff candidates (the quantile solve is
# vectorized, so candidates are computed in geometrically growing batches;
# starting small keeps short searches cheap).
_CHUNK_INITIAL = 8
_CHUNK_MAX = 8192


@dataclass(frozen=True)
class StandardParams:
    """Standardized two-parameter form: lam < 0, beta > 0."""

    lam: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam < 0):
            raise DomainError(f"lam must be negative and finite, got {self.lam}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")

    def gamma(self) -> GammaShapeRate:
        """Gamma(shape, rate) whose reciprocal has CDF F."""
        return GammaShapeRate(-self.lam, self.beta / 2.0)


@dataclass(frozen=True)
class CutoffSearchConfig:
    """Knobs of the rate-driven cutoff search."""

    eps0: float
    adhoc_double: bool = False
    max_cutoffs: int = DEFAULT_MAX_CUTOFFS

    def __post_init__(self):
        if not (0.0 < self.eps0 < 1.0):
            raise DomainError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if self.adhoc_double and not 2.0 * self.eps0 < 1.0:
            raise DomainError("adhoc doubling requires 2 * eps0 < 1")
        if self.max_cutoffs < 1:
            raise DomainError("max_cutoffs must be at least 1")

    @property
    def effective_rate(self) -> float:
        return 2.0 * self.eps0 if self.adhoc_double else self.eps0


@dataclass(frozen=True)
class Envelope:
    """Precomputed segment tables of the piecewise proposal.

    With cutoffs k_1 < ... < k_K extended by k_0 = 0 and k_{K+1} = inf,
    segment i carries the step value ``seg_cdf[i] = F(k_{i+1})`` (last entry
    exactly 1), the exponential mass ``seg_exp_mass[i] = integral of h over
    the segment``, and the mixture weight ``weights[i]`` proportional to
    their product.
    """

    params: StandardParams
    cutoffs: np.ndarray
    seg_cdf: np.ndarray
    seg_exp_mass: np.ndarray
    weights: np.ndarray
    log_seg_cdf: np.ndarray = field(repr=False)
    lower_edges: np.ndarray = field(repr=False)
    upper_edges: np.ndarray = field(repr=False)
    cum_weights: np.ndarray = field(repr=False)

    @property
    def cutoff_count(self) -> int:
        return int(self.cutoffs.shape[0])

    @property
    def rate(self) -> float:
        """Rate of the exponential factor h."""
        return self.params.beta / 2.0


def build_envelope(sp: StandardParams, cutoffs) -> Envelope:
    """Assemble the segment tables for a given cutoff vector.

    ``cutoffs`` may be empty, in which case the proposal degenerates to the
    plain exponential h (the naive envelope).
    """
    k = np.asarray(cutoffs, dtype=float)
    if k.ndim != 1:
        raise DomainError("cutoffs must be a one-dimensional sequence")
    if k.size:
        if not np.all(np.isfinite(k)) or not np.all(k > 0):
            raise DomainError("cutoffs must be positive and finite")
        if not np.all(np.diff(k) > 0):
            raise DomainError("cutoffs must be strictly increasing")

    b_half = sp.beta / 2.0
    g = sp.gamma()

    log_cdf = np.concatenate([inv_gamma_log_cdf(k, g), [0.0]]) if k.size else np.array([0.0])
    seg_cdf = np.exp(log_cdf)
    seg_cdf[-1] = 1.0

    lower = np.concatenate([[0.0], k])
    upper = np.concatenate([k, [np.inf]])
    # Masses e^{-b*lo} - e^{-b*hi} assembled on the log scale so tiny beta
    # does not cancel: log mass = -b*lo + log(1 - e^{-b*(hi-lo)}).  Segments
    # between astronomically large cutoffs underflow to mass exactly 0;
    # they keep weight 0 and are never sampled.
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        d = b_half * (upper - lower)
        log_mass = -b_half * lower + np.where(
            np.isinf(d), 0.0, np.log(-np.expm1(-np.minimum(d, 745.0)))
        )
        seg_mass = np.exp(log_mass)
    if abs(seg_mass.sum() - 1.0) > 1e-9:
        raise ConvergenceError("segment exponential masses do not sum to 1")
    if np.any(np.diff(seg_cdf) <= 0):
        raise DomainError("segment CDF values are not strictly increasing")

    log_w = log_cdf + log_mass
    z = np.exp(log_w - logsumexp(log_w))
    z /= z.sum()
    cum = np.cumsum(z)
    cum[-1] = 1.0

    for arr in (k, seg_cdf, seg_mass, z, log_cdf, lower, upper, cum):
        arr.setflags(write=False)
    return Envelope(
        params=sp,
        cutoffs=k,
        seg_cdf=seg_cdf,
        seg_exp_mass=seg_mass,
        weights=z,
        log_seg_cdf=log_cdf,
        lower_edges=lower,
        upper_edges=upper,
        cum_weights=cum,
    )


def _rate_search_steps(sp: StandardParams, eps: float, max_cutoffs: int):
    """Iterate the rate-driven search, yielding per-iteration state.

    Yields ``(k0, below_mass, left, right)`` after each update: ``k0`` is
    the cutoff candidate placed in that iteration (largest first),
    ``below_mass`` the h-mass below it, and ``left``/``right`` the shares of
    the current envelope below/above it.  The loop guard is checked before
    every iteration.
    """
    b_half = sp.beta / 2.0
    g = sp.gamma()
    log_step = math.log1p(-eps / 2.0)

    left, right = 1.0, 0.0
    prev_mass = 1.0  # integral of h below the previous (initially infinite) cutoff
    n = 0
    pending = np.empty(0)
    cursor = 0
    next_index = 1
    chunk = _CHUNK_INITIAL

    while left > (left + right) * (eps / 2.0):
        if cursor >= pending.shape[0]:
            idx = np.arange(next_index, next_index + chunk, dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                pending = inv_gamma_quantile_from_log(idx * log_step, g)
            cursor = 0
            next_index += chunk
            chunk = min(chunk * 2, _CHUNK_MAX)
        k0 = float(pending[cursor])
        cursor += 1
        n += 1
        if n > max_cutoffs:
            raise CutoffCapExceededError(
                f"cutoff search exceeded {max_cutoffs} iterations "
                f"(lam={sp.lam}, beta={sp.beta}, eps={eps})"
            )
        mass0 = -math.expm1(-b_half * k0)
        p_left = mass0 / prev_mass
        right += (1.0 - p_left) * left
        left *= p_left * (1.0 - eps / 2.0)
        prev_mass = mass0
        yield k0, mass0, left, right


def find_cutoffs_by_rate(sp: StandardParams, cfg: CutoffSearchConfig) -> np.ndarray:
    """Choose cutoff points that bound the rejection rate by ``cfg.eps0``.

    Returns a strictly increasing vector: every finite candidate the search
    places, largest first (see the module docstring for the rare omission
    of float-overflowed candidates).  The resulting envelope's guaranteed
    overall rejection rate is at most the effective eps.
    """
    eps = cfg.effective_rate
    kept: list[float] = []
    for k0, _, _, _ in _rate_search_steps(sp, eps, cfg.max_cutoffs):
        if math.isfinite(k0):
            if kept and not k0 < kept[-1]:
                raise ConvergenceError(
                    "cutoff candidates stopped decreasing; eps is too close "
                    "to the quantile resolution"
                )
            kept.append(k0)
    kept.reverse()
    return np.asarray(kept, dtype=float)


# Rescue-scan budget for find_cutoffs_by_count (see below).
_COUNT_SEARCH_BUDGET = 3000


def find_cutoffs_by_count(
    sp: StandardParams,
    count: int,
    t0: float = DEFAULT_COUNT_SEARCH_THRESHOLD,
    max_cutoffs: int = DEFAULT_MAX_CUTOFFS,
) -> np.ndarray:
    """Choose exactly ``count`` cutoff points via binary search on the rate.

    The produced count is (coarsely) a non-increasing step function of the
    rate, so a bisection on (0, 1) down to interval width ``t0`` locates the
    boundary rate and the vector is rebuilt at the final left endpoint.
    Near the shape-zero corner the stored count wobbles by +-1 around that
    trend (dropped unrepresentable cutoffs beat against the termination
    phase), so when the bisection endpoint misses the target, a bounded
    deterministic scan around it hunts for a rate window achieving the exact
    count before giving up.  Raises CutoffCountUnattainableError when no
    probed rate yields ``count``.
    """
    if count < 1:
        raise DomainError(f"requested cutoff count must be >= 1, got {count}")
    if not 0.0 < t0 < 1.0:
        raise DomainError(f"threshold t0 must lie in (0, 1), got {t0}")

    def probe(eps):
        return find_cutoffs_by_rate(
            sp, CutoffSearchConfig(eps, max_cutoffs=max_cutoffs)
        )

    lo, hi = 0.0, 1.0
    count_below = None  # nearest achievable count < requested (from the hi side)
    while hi - lo > t0:
        mid = (lo + hi) / 2.0
        k_mid = len(probe(mid))
        if k_mid < count:
            hi = mid
            count_below = k_mid
        else:
            lo = mid
    anchor = lo if lo > 0.0 else t0
    cut = probe(anchor)
    if len(cut) == count:
        return cut

    # Rescue scan: alternate outward around the bisection endpoint with a
    # step fine enough to resolve count-K plateaus (their width shrinks
    # roughly like eps/K).
    nearest_above = len(cut)
    step = anchor / (16.0 * (count + 2.0))
    seen = {round(anchor / t0)}
    for j in range(1, _COUNT_SEARCH_BUDGET):
        off = ((j + 1) // 2) * step
        eps = anchor - off if j % 2 else anchor + off
        if not t0 <= eps <= 1.0 - t0:
            continue
        key = round(eps / t0)
        if key in seen:
            continue
        seen.add(key)
        candidate = probe(eps)
        if len(candidate) == count:
            return candidate
        if len(candidate) < count:
            count_below = len(candidate)
        else:
            nearest_above = min(nearest_above, len(candidate))
    raise CutoffCountUnattainableError(count, count_below, nearest_above)


def count_cutoffs_curve(sp: StandardParams, eps_grid, max_cutoffs=DEFAULT_MAX_CUTOFFS):
    """Construction complexity K*(eps) over a grid of rates.

    Counts the pulldown iterations the rate search performs (every cutoff
    point placed, whether or not it is representable and stored), which is a
    non-increasing step function of the rate.
    """
    grid = np.asarray(eps_grid, dtype=float)
    if np.any(grid <= 0) or np.any(grid >= 1):
        raise DomainError("rate grid values must lie in (0, 1)")
    counts = np.empty(grid.shape, dtype=int)
    for i, eps in enumerate(grid):
        counts[i] = sum(1 for _ in _rate_search_steps(sp, float(eps), max_cutoffs))
    return counts
