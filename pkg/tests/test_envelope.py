"""Envelope construction: segment tables, cutoff searches, domination."""

import math

import numpy as np
import pytest

from gigsampler.envelope import (
    CutoffSearchConfig,
    StandardParams,
    _rate_search_steps,
    build_envelope,
    count_cutoffs_curve,
    find_cutoffs_by_count,
    find_cutoffs_by_rate,
)
from gigsampler.errors import (
    CutoffCapExceededError,
    CutoffCountUnattainableError,
    DomainError,
)
from gigsampler.special import inv_gamma_cdf

SP12 = StandardParams(-1.0, 2.0)

# Closed forms for lam=-1, beta=2 (F(y) = exp(-1/y), h = Exp(1)) with
# cutpoints (0.5, 1, 1.5).
SEG_CDF_12 = (math.exp(-2.0), math.exp(-1.0), math.exp(-2.0 / 3.0), 1.0)
SEG_MASS_12 = (
    1.0 - math.exp(-0.5),
    math.exp(-0.5) - math.exp(-1.0),
    math.exp(-1.0) - math.exp(-1.5),
    math.exp(-1.5),
)
WEIGHTS_12 = (
    0.12143955838342224,
    0.20021998301117827,
    0.16948255657687167,
    0.5088579020285279,
)


def test_tables_match_closed_forms():
    env = build_envelope(SP12, [0.5, 1.0, 1.5])
    assert env.seg_cdf == pytest.approx(SEG_CDF_12, rel=1e-10)
    assert env.seg_exp_mass == pytest.approx(SEG_MASS_12, rel=1e-10)
    assert env.weights == pytest.approx(WEIGHTS_12, rel=1e-10)
    assert env.seg_cdf[-1] == 1.0


def test_empty_cutoffs_is_the_naive_proposal():
    env = build_envelope(SP12, [])
    assert env.cutoff_count == 0
    assert env.seg_cdf.tolist() == [1.0]
    assert env.weights.tolist() == [1.0]


@pytest.mark.parametrize(
    "lam,beta,cutoffs",
    [(-1.0, 2.0, (0.5, 1.0, 1.5)), (-0.1, 0.1, (1.0, 7.0, 40.0)),
     (-0.001, 1e-4, (10.0, 1e4)), (-2.0, 0.5, (0.2,))],
)
def test_masses_always_sum_to_one(lam, beta, cutoffs):
    env = build_envelope(StandardParams(lam, beta), cutoffs)
    assert env.seg_exp_mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert env.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_build_envelope_validation():
    with pytest.raises(DomainError):
        build_envelope(SP12, [1.0, 1.0])
    with pytest.raises(DomainError):
        build_envelope(SP12, [-0.5, 1.0])
    with pytest.raises(DomainError):
        build_envelope(SP12, [0.5, np.inf])


def test_standard_params_validation():
    with pytest.raises(DomainError):
        StandardParams(0.5, 1.0)
    with pytest.raises(DomainError):
        StandardParams(-1.0, 0.0)


def test_rate_search_reproduces_worked_example():
    # With F(y) = exp(-1/y), targeting rate 0.8 places the two largest
    # cutoffs at F = 0.6 and F = 0.36.
    cut = find_cutoffs_by_rate(SP12, CutoffSearchConfig(0.8))
    assert cut[-1] == pytest.approx(1.0 / (-math.log(0.6)), rel=1e-9)
    assert cut[-2] == pytest.approx(1.0 / (-math.log(0.36)), rel=1e-9)
    assert np.all(np.diff(cut) > 0)


def test_rate_search_near_one_places_few_cutoffs():
    cut = find_cutoffs_by_rate(StandardParams(-1.0, 0.1), CutoffSearchConfig(0.999))
    assert len(cut) <= 2


def test_rate_search_count_grows_as_rate_shrinks():
    sp = StandardParams(-0.001, 0.1)
    lens = [
        len(find_cutoffs_by_rate(sp, CutoffSearchConfig(e))) for e in (0.1, 0.5, 0.9)
    ]
    assert lens[0] >= lens[1] >= lens[2]


@pytest.mark.parametrize("lam", [-1.0, -0.1, -0.01, -0.001])
@pytest.mark.parametrize("beta", [1e-4, 1e-3, 1e-2, 0.1])
@pytest.mark.parametrize("eps0", [0.1, 0.25, 0.5, 0.75])
def test_rate_search_terminates_across_grid(lam, beta, eps0):
    cut = find_cutoffs_by_rate(StandardParams(lam, beta), CutoffSearchConfig(eps0))
    assert len(cut) >= 1
    assert np.all(np.isfinite(cut)) and np.all(np.diff(cut) > 0)


def test_loop_state_stays_a_mass_split():
    # At every iteration both shares are non-negative and sum to at most
    # the initial total.
    for lam, beta, eps in [(-1.0, 2.0, 0.8), (-0.001, 1e-4, 0.25), (-0.1, 0.1, 0.5)]:
        for _, _, left, right in _rate_search_steps(StandardParams(lam, beta), eps, 10**6):
            assert left >= 0.0
            assert right >= 0.0
            assert left + right <= 1.0 + 1e-12


def test_cap_exceeded_reported():
    with pytest.raises(CutoffCapExceededError):
        find_cutoffs_by_rate(
            StandardParams(-0.001, 0.1), CutoffSearchConfig(0.05, max_cutoffs=10)
        )


def test_adhoc_double_uses_twice_the_rate():
    plain = find_cutoffs_by_rate(SP12, CutoffSearchConfig(0.4))
    doubled = find_cutoffs_by_rate(SP12, CutoffSearchConfig(0.2, adhoc_double=True))
    assert np.allclose(plain, doubled)
    with pytest.raises(DomainError):
        CutoffSearchConfig(0.5, adhoc_double=True)


def test_domination_on_dense_grids():
    rng = np.random.default_rng(202)
    for _ in range(8):
        lam = -float(np.exp(rng.uniform(math.log(1e-3), math.log(2.0))))
        beta = float(np.exp(rng.uniform(math.log(1e-4), math.log(2.0))))
        sp = StandardParams(lam, beta)
        cut = find_cutoffs_by_rate(sp, CutoffSearchConfig(float(rng.uniform(0.1, 0.9))))
        env = build_envelope(sp, cut)
        y = np.exp(np.linspace(math.log(1e-6), math.log(1e6), 10_000)) / beta
        exact = inv_gamma_cdf(y, sp.gamma())
        idx = np.searchsorted(env.cutoffs, y, side="right")
        assert np.all(env.seg_cdf[idx] >= exact)


def test_count_search_consistent_with_rate_search():
    target = len(find_cutoffs_by_rate(SP12, CutoffSearchConfig(0.5)))
    cut = find_cutoffs_by_count(SP12, target)
    assert len(cut) == target


def test_count_search_hits_fifty_in_the_hard_corner():
    cut = find_cutoffs_by_count(StandardParams(-0.001, 0.1), 50)
    assert len(cut) == 50
    assert np.all(np.diff(cut) > 0)


def test_count_search_reports_unattainable_counts():
    # One stored cutoff plus immediate termination cannot happen here: the
    # construction always places several cutoffs before the guard can die.
    with pytest.raises(CutoffCountUnattainableError) as exc:
        find_cutoffs_by_count(StandardParams(-0.001, 0.1), 1)
    assert exc.value.requested == 1
    assert exc.value.nearest_above is None or exc.value.nearest_above > 1


def test_count_search_validation():
    with pytest.raises(DomainError):
        find_cutoffs_by_count(SP12, 0)
    with pytest.raises(DomainError):
        find_cutoffs_by_count(SP12, 3, t0=0.0)


def test_curve_is_non_increasing_and_flat_near_one():
    grid = (np.arange(1, 41) - 0.5) / 40
    for sp in (SP12, StandardParams(-0.1, 0.01)):
        counts = count_cutoffs_curve(sp, grid)
        assert np.all(np.diff(counts) <= 0)
    near_one = count_cutoffs_curve(StandardParams(-1.0, 0.1), [0.999])
    assert near_one[0] <= 1


def test_curve_rejects_bad_grid():
    with pytest.raises(DomainError):
        count_cutoffs_curve(SP12, [0.0, 0.5])
