"""Rejection sampling from the quasi-density through the piecewise proposal.

A proposal draw is a two-stage mixture: pick a segment by its weight, then
draw from the exponential truncated to that segment.  The truncation uses
the modulo identity -- for E ~ Exp(rate), ``E mod w`` is Exp(rate) truncated
to (0, w) -- so no inverse CDF is needed in the hot loop.  A draw y landing
in segment i is accepted with probability F(y) / F(k_{i+1}), the ratio of
the target to the step envelope, evaluated as a difference of log CDFs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelope import Envelope, StandardParams
from .errors import ConvergenceError, DomainError
from .special import _log_upper_tail
from .truncated import open_uniform, standard_exponential

# Upper bound on a single proposal batch; keeps memory flat for huge n or
# terrible acceptance rates.
_MAX_BATCH = 4_000_000


@dataclass
class AcceptanceStats:
    """Proposal/acceptance counters of one or more sampling runs."""

    proposals: int = 0
    accepted: int = 0

    def __post_init__(self):
        if self.proposals < 0 or self.accepted < 0 or self.accepted > self.proposals:
            raise DomainError("need 0 <= accepted <= proposals")

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else float("nan")

    @property
    def rejection_constant(self) -> float:
        return self.proposals / self.accepted if self.accepted else float("inf")

    def merge(self, other: "AcceptanceStats") -> "AcceptanceStats":
        return AcceptanceStats(
            self.proposals + other.proposals, self.accepted + other.accepted
        )


def sample_segment(env: Envelope, rng, size=None):
    """Categorical draw over the envelope segments by mixture weight."""
    u = open_uniform(rng, size)
    idx = np.searchsorted(env.cum_weights, u, side="right")
    idx = np.minimum(idx, env.cutoff_count)
    if size is None:
        return int(idx)
    return idx


def sample_truncated_exponential(rate: float, lower: float, upper: float, rng, size=None):
    """Exp(rate) conditioned on (lower, upper); upper may be infinite.

    Finite windows use the modulo identity, the unbounded tail uses the
    memoryless shift.
    """
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if not 0 <= lower < upper:
        raise DomainError(f"need 0 <= lower < upper, got [{lower}, {upper})")
    e = standard_exponential(rng, size) / rate
    if np.isinf(upper):
        return lower + e
    return lower + np.fmod(e, upper - lower)


def _propose(env: Envelope, m: int, rng):
    """Draw ``m`` proposals; returns (y, accepted mask)."""
    seg = sample_segment(env, rng, m)
    lo = env.lower_edges[seg]
    hi = env.upper_edges[seg]
    e = standard_exponential(rng, m) / env.rate
    with np.errstate(invalid="ignore"):
        y = np.where(np.isinf(hi), lo + e, lo + np.fmod(e, hi - lo))
    # y == 0 can only happen on an exact float multiple in segment 0; the
    # kernel maps 1/0 -> inf -> log F = -inf, a guaranteed rejection.
    g = env.params.gamma()
    with np.errstate(divide="ignore"):
        log_f = _log_upper_tail(g.rate / y, g.shape)
    log_ratio = log_f - env.log_seg_cdf[seg]
    accept = np.log(open_uniform(rng, m)) <= log_ratio
    return y, accept


def sample_quasi_density(
    n: int, sp: StandardParams, env: Envelope, rng, max_proposals=None
):
    """Draw ``n`` variates from the normalized h(y)F(y) quasi-density.

    Returns ``(draws, stats)`` where ``stats`` counts every proposal made.
    ``max_proposals`` (optional) aborts pathological runs; the default is
    unbounded, matching the plain accept/reject contract.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if env.params != sp:
        raise DomainError("envelope was built for different parameters")
    out = np.empty(n)
    got = 0
    stats = AcceptanceStats()
    acc_est = 1.0
    while got < n:
        want = n - got
        m = min(int(want / max(acc_est, 1e-3) * 1.2) + 32, _MAX_BATCH)
        if max_proposals is not None and stats.proposals + m > max_proposals:
            m = max_proposals - stats.proposals
            if m <= 0:
                raise ConvergenceError(
                    f"exceeded {max_proposals} proposals with {got}/{n} accepted"
                )
        y, accept = _propose(env, m, rng)
        k = int(accept.sum())
        take = min(k, want)
        out[got : got + take] = y[accept][:take]
        got += take
        stats.proposals += m
        stats.accepted += k  # count every acceptance, including overshoot
        acc_est = max(stats.accepted / stats.proposals, 1e-4)
    return out, stats


def measure_acceptance(sp: StandardParams, env: Envelope, n_proposals: int, rng):
    """Run exactly ``n_proposals`` proposals and count acceptances."""
    if n_proposals < 1:
        raise DomainError("n_proposals must be >= 1")
    stats = AcceptanceStats()
    left = n_proposals
    while left > 0:
        m = min(left, _MAX_BATCH)
        _, accept = _propose(env, m, rng)
        stats.proposals += m
        stats.accepted += int(accept.sum())
        left -= m
    return stats
