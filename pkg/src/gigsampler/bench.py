"""Desk-scale benchmark experiments with reproducible CSV/JSON output.

Each runner takes an ExperimentSpec and returns a payload dict with three
keys: ``spec`` (the inputs), ``results`` (a list of per-cell row dicts with
a fixed column set), and ``versions``.  Cell random streams are derived
from (seed, cell index, replicate) so results do not depend on execution
order; identical specs give byte-identical output (timing cells excepted).
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import platform
import time
from dataclasses import dataclass

import numpy as np
import scipy
from scipy.stats import kstest

from . import __version__
from .envelope import (
    CutoffSearchConfig,
    StandardParams,
    build_envelope,
    count_cutoffs_curve,
    find_cutoffs_by_count,
    find_cutoffs_by_rate,
)
from .errors import DomainError, GigSamplerError
from .generator import (
    GigParams,
    GigQuadratureCdf,
    SamplerConfig,
    check_proposition1,
    derive_form,
    sample_gig,
)
from .rejection import (
    measure_acceptance,
    sample_quasi_density,
    sample_truncated_exponential,
)
from .special import GammaShapeRate, gamma_log_upper_cdf, inv_gamma_cdf
from .truncated import (
    TruncatedGammaSpec,
    _sample_truncated_gamma_many,
    sample_truncated_gamma,
    standard_exponential,
)

EXPERIMENTS = (
    "acceptance-grid",
    "quantile-check",
    "cutoff-curve",
    "timing-grid",
    "rejection-grid",
    "validate",
)

ACCEPTANCE_MODES = ("naive", "rate", "rate-doubled", "count")

COLUMNS = {
    "acceptance-grid": (
        "lam", "beta", "mode", "eps0", "requested_cutoffs", "cutoff_count",
        "replicates", "draws", "acceptance_mean", "acceptance_sd",
        "rejection_constant_mean", "error",
    ),
    "quantile-check": (
        "lam", "psi", "chi", "draws", "statistic", "actual", "simulated",
        "abs_diff",
    ),
    "cutoff-curve": ("lam", "beta", "eps", "cutoff_count", "error"),
    "timing-grid": (
        "lam", "beta", "eps0", "n", "replicates", "cutoff_count",
        "mean_seconds_per_variate", "median_seconds_per_variate",
        "log10_mean_seconds", "column_min", "model_seconds_per_variate",
        "t1_search_per_cutoff", "t2_tables_per_cutoff",
        "t3_per_proposal", "t4_per_variate",
    ),
    "rejection-grid": (
        "lam", "beta", "requested_cutoffs", "cutoff_count", "draws",
        "replicates", "rejection_constant_mean", "rejection_constant_sd",
        "acceptance_mean", "error",
    ),
    "validate": ("check", "detail", "statistic", "threshold", "passed"),
    "sample": ("value",),
}

_QUANTILE_LEVELS = ((0.1, "q10"), (0.25, "q25"), (0.5, "median"),
                    (0.75, "q75"), (0.9, "q90"))


@dataclass(frozen=True)
class TimingModel:
    """Unit costs of the generation pipeline, estimated from phase timers.

    ``t1`` per cutoff searched, ``t2`` per cutoff tabulated, ``t3`` per
    proposal drawn, ``t4`` per variate post-processed; all seconds.
    """

    t1: float
    t2: float
    t3: float
    t4: float

    def __post_init__(self):
        if min(self.t1, self.t2, self.t3, self.t4) < 0:
            raise DomainError("unit costs must be non-negative")

    def seconds_per_variate(self, eps0: float, cutoffs: int, n: int) -> float:
        """Setup amortized over n, proposal cost inflated by rejection."""
        return (self.t1 + self.t2) * cutoffs / n + self.t3 / (1.0 - eps0) + self.t4


@dataclass(frozen=True)
class ExperimentSpec:
    """Inputs of one benchmark run; every field lands in the output spec."""

    experiment: str
    lambdas: tuple[float, ...] = ()
    betas: tuple[float, ...] = ()
    psi: float | None = None
    chi: float | None = None
    replicates: int = 30
    draws: int = 100_000
    eps0s: tuple[float, ...] = ()
    counts: tuple[int, ...] = ()
    mode: str = "rate"
    adhoc_double: bool = False
    curve_points: int = 500
    sizes: tuple[int, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if self.replicates < 1 or self.draws < 1:
            raise DomainError("replicates and draws must be >= 1")

    def as_dict(self):
        return dataclasses.asdict(self)


def _versions():
    return {
        "gigsampler": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _payload(spec: ExperimentSpec, rows):
    return {"spec": spec.as_dict(), "results": rows, "versions": _versions()}


def _cell_rng(seed, cell, replicate=0):
    return np.random.default_rng([seed, cell, replicate])


def run_acceptance_grid(spec: ExperimentSpec):
    """Mean/sd acceptance rates over a (lam, beta, mode parameter) grid.

    Covers all four table styles: naive proposal, rate-controlled, the
    ad-hoc doubled-rate variant, and fixed cutoff counts.  Cutoffs are
    constructed once per cell and shared across replicates; per-cell errors
    are recorded in the output and leave the rest of the grid running.
    """
    if spec.mode not in ACCEPTANCE_MODES:
        raise DomainError(f"mode must be one of {ACCEPTANCE_MODES}")
    if spec.mode == "naive":
        params = [None]
    elif spec.mode == "count":
        params = list(spec.counts) or [10]
    else:
        params = list(spec.eps0s) or [0.5]

    rows = []
    for cell, (lam, beta, par) in enumerate(
        itertools.product(spec.lambdas, spec.betas, params)
    ):
        row = {
            "lam": lam, "beta": beta, "mode": spec.mode,
            "eps0": par if spec.mode in ("rate", "rate-doubled") else None,
            "requested_cutoffs": par if spec.mode == "count" else None,
            "cutoff_count": None,
            "replicates": spec.replicates, "draws": spec.draws,
            "acceptance_mean": None, "acceptance_sd": None,
            "rejection_constant_mean": None, "error": None,
        }
        try:
            sp = StandardParams(lam, beta)
            if spec.mode == "naive":
                cutoffs = np.empty(0)
            elif spec.mode == "count":
                cutoffs = find_cutoffs_by_count(sp, int(par))
            else:
                cutoffs = find_cutoffs_by_rate(
                    sp,
                    CutoffSearchConfig(
                        par, adhoc_double=(spec.mode == "rate-doubled")
                    ),
                )
            env = build_envelope(sp, cutoffs)
            rates = np.empty(spec.replicates)
            for rep in range(spec.replicates):
                stats = measure_acceptance(
                    sp, env, spec.draws, _cell_rng(spec.seed, cell, rep)
                )
                rates[rep] = stats.acceptance_rate
            row["cutoff_count"] = env.cutoff_count
            row["acceptance_mean"] = float(rates.mean())
            row["acceptance_sd"] = float(rates.std(ddof=1)) if spec.replicates > 1 else 0.0
            row["rejection_constant_mean"] = float((1.0 / rates).mean())
        except GigSamplerError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return _payload(spec, rows)


def run_quantile_check(spec: ExperimentSpec):
    """Quadrature-exact versus simulated summary statistics.

    The "actual" column comes from the quadrature CDF oracle; the simulated
    column from generator draws (sample quantiles by linear interpolation on
    order statistics).  A Kolmogorov-Smirnov row closes each parameter set.
    """
    if spec.psi is None or spec.chi is None:
        raise DomainError("quantile-check requires psi and chi")
    rows = []
    for cell, lam in enumerate(spec.lambdas):
        p = GigParams(lam, spec.psi, spec.chi)
        oracle = GigQuadratureCdf(p)
        x, _, _ = sample_gig(
            spec.draws, p, SamplerConfig(eps0=0.25, seed=int(_cell_rng(spec.seed, cell).integers(2**63)))
        )
        base = {"lam": lam, "psi": spec.psi, "chi": spec.chi, "draws": spec.draws}
        for level, name in _QUANTILE_LEVELS:
            actual = float(oracle.quantile(level))
            sim = float(np.quantile(x, level))
            rows.append({**base, "statistic": name, "actual": actual,
                         "simulated": sim, "abs_diff": abs(actual - sim)})
        actual_mean = float(oracle.mean())
        sim_mean = float(np.mean(x))
        rows.append({**base, "statistic": "mean", "actual": actual_mean,
                     "simulated": sim_mean, "abs_diff": abs(actual_mean - sim_mean)})
        ks = kstest(x, oracle.cdf)
        rows.append({**base, "statistic": "ks_statistic", "actual": None,
                     "simulated": float(ks.statistic), "abs_diff": None})
        rows.append({**base, "statistic": "ks_pvalue", "actual": None,
                     "simulated": float(ks.pvalue), "abs_diff": None})
    return _payload(spec, rows)


def run_cutoff_curve(spec: ExperimentSpec):
    """Construction complexity K*(eps) over an equispaced rate grid.

    Verifies on the fly that each (lam, beta) series is non-increasing in
    eps; capped cells are marked rather than aborting the run.
    """
    pts = spec.curve_points
    grid = (np.arange(1, pts + 1) - 0.5) / pts
    rows = []
    for lam, beta in itertools.product(spec.lambdas, spec.betas):
        sp = StandardParams(lam, beta)
        counts = []
        for eps in grid:
            try:
                c = int(count_cutoffs_curve(sp, [float(eps)])[0])
                counts.append(c)
                rows.append({"lam": lam, "beta": beta, "eps": float(eps),
                             "cutoff_count": c, "error": None})
            except GigSamplerError as exc:
                rows.append({"lam": lam, "beta": beta, "eps": float(eps),
                             "cutoff_count": None,
                             "error": f"{type(exc).__name__}: {exc}"})
        if np.any(np.diff(counts) > 0):
            raise AssertionError(
                f"cutoff-count curve is not non-increasing at lam={lam}, beta={beta}"
            )
    return _payload(spec, rows)


def _timed_generation(p: GigParams, eps0: float, n: int, rng):
    """One instrumented generator run; returns phase times and counts."""
    form = derive_form(p)
    sp = form.standard
    t0 = time.perf_counter()
    cutoffs = find_cutoffs_by_rate(sp, CutoffSearchConfig(eps0))
    t1 = time.perf_counter()
    env = build_envelope(sp, cutoffs)
    t2 = time.perf_counter()
    y, stats = sample_quasi_density(n, sp, env, rng)
    t3 = time.perf_counter()
    g = sp.gamma()
    x = 1.0 / (form.alpha * _sample_truncated_gamma_many(g, 1.0 / y, rng))
    if form.sign_flag:
        x = 1.0 / x
    t4 = time.perf_counter()
    return {
        "search": t1 - t0,
        "tables": t2 - t1,
        "proposals": t3 - t2,
        "post": t4 - t3,
        "total": t4 - t0,
        "cutoffs": len(cutoffs),
        "n_proposals": stats.proposals,
    }


def run_timing_grid(spec: ExperimentSpec):
    """Average generation time per variate over an (eps0, n) grid.

    Emits per-cell means and medians over replicates, marks the per-column
    (fixed n) minimum, and reports the four fitted unit costs together with
    the model prediction (search+tables per cutoff amortized over n, one
    proposal cost inflated by the rejection rate, and a per-variate
    post-processing cost).  Wall-clock cells are inherently machine
    dependent; everything runs serially to avoid contention bias.
    """
    lam = spec.lambdas[0] if spec.lambdas else 0.1
    beta = spec.betas[0] if spec.betas else 0.1
    p = GigParams(lam, beta, beta)
    eps0s = list(spec.eps0s) or [0.05, 0.1, 0.15, 0.25, 0.35, 0.5, 0.65, 0.8]
    sizes = [int(s) for s in (spec.sizes or (1, 10, 100, 1000, 10000))]

    cells = {}
    unit_costs = {"search": [], "tables": [], "proposals": [], "post": []}
    for cell, (eps0, n) in enumerate(itertools.product(eps0s, sizes)):
        per_rep = np.empty(spec.replicates)
        k_count = 0
        for rep in range(spec.replicates):
            r = _timed_generation(p, eps0, n, _cell_rng(spec.seed, cell, rep))
            per_rep[rep] = r["total"] / n
            k_count = r["cutoffs"]
            if r["cutoffs"]:
                unit_costs["search"].append(r["search"] / r["cutoffs"])
                unit_costs["tables"].append(r["tables"] / (r["cutoffs"] + 1))
            unit_costs["proposals"].append(r["proposals"] / max(r["n_proposals"], 1))
            unit_costs["post"].append(r["post"] / n)
        cells[(eps0, n)] = (float(per_rep.mean()), float(np.median(per_rep)), k_count)

    model = TimingModel(
        t1=float(np.median(unit_costs["search"])) if unit_costs["search"] else 0.0,
        t2=float(np.median(unit_costs["tables"])) if unit_costs["tables"] else 0.0,
        t3=float(np.median(unit_costs["proposals"])),
        t4=float(np.median(unit_costs["post"])),
    )

    col_minima = {
        n: min(cells[(e, n)][0] for e in eps0s) for n in sizes
    }
    rows = []
    for eps0, n in itertools.product(eps0s, sizes):
        mean_t, med_t, k_count = cells[(eps0, n)]
        rows.append({
            "lam": lam, "beta": beta, "eps0": eps0, "n": n,
            "replicates": spec.replicates, "cutoff_count": k_count,
            "mean_seconds_per_variate": mean_t,
            "median_seconds_per_variate": med_t,
            "log10_mean_seconds": math.log10(mean_t) if mean_t > 0 else None,
            "column_min": mean_t == col_minima[n],
            "model_seconds_per_variate": model.seconds_per_variate(eps0, k_count, n),
            "t1_search_per_cutoff": model.t1, "t2_tables_per_cutoff": model.t2,
            "t3_per_proposal": model.t3, "t4_per_variate": model.t4,
        })
    return _payload(spec, rows)


def run_rejection_constant_grid(spec: ExperimentSpec):
    """Rejection constants over positive (lam, beta) with fixed cutoff counts.

    The comparison range is lam, beta in (0, 1.5]; each cell draws
    ``spec.draws`` accepted variates and reports proposals per acceptance.
    Cutoffs are found once per cell and reused across replicates.
    """
    for v in list(spec.lambdas) + list(spec.betas):
        if not 0.0 < v <= 1.5:
            raise DomainError(
                f"rejection-grid parameters must lie in (0, 1.5], got {v}"
            )
    counts = [int(c) for c in (spec.counts or (10, 20, 40, 80, 160, 320))]
    rows = []
    for cell, (lam, beta, k_req) in enumerate(
        itertools.product(spec.lambdas, spec.betas, counts)
    ):
        row = {
            "lam": lam, "beta": beta, "requested_cutoffs": k_req,
            "cutoff_count": None, "draws": spec.draws,
            "replicates": spec.replicates,
            "rejection_constant_mean": None, "rejection_constant_sd": None,
            "acceptance_mean": None, "error": None,
        }
        try:
            sp = StandardParams(-lam, beta)
            cutoffs = find_cutoffs_by_count(sp, k_req)
            env = build_envelope(sp, cutoffs)
            consts = np.empty(spec.replicates)
            accs = np.empty(spec.replicates)
            for rep in range(spec.replicates):
                _, stats = sample_quasi_density(
                    spec.draws, sp, env, _cell_rng(spec.seed, cell, rep)
                )
                consts[rep] = stats.rejection_constant
                accs[rep] = stats.acceptance_rate
            row["cutoff_count"] = env.cutoff_count
            row["rejection_constant_mean"] = float(consts.mean())
            row["rejection_constant_sd"] = (
                float(consts.std(ddof=1)) if spec.replicates > 1 else 0.0
            )
            row["acceptance_mean"] = float(accs.mean())
        except GigSamplerError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return _payload(spec, rows)


def run_validate(spec: ExperimentSpec):
    """Statistical property battery; every row must come out passed.

    Covers the shifted-exponential and uniform-transform identities behind
    the truncated-gamma route, the shift and modulo identities behind the
    truncated-exponential draw, the two-stage construction equivalence,
    envelope domination, and the rate-mode acceptance guarantee.
    """
    alpha = 0.01
    n = spec.draws
    rows = []
    rng = np.random.default_rng([spec.seed, 777])

    shift_ps = (-0.5, -2.0, -7.5, -15.0, -30.0)
    for p_log in shift_ps:
        y = standard_exponential(rng, n) - p_log

        def cdf(v, p_log=p_log):
            return np.clip(1.0 - np.exp(-(v + p_log)), 0.0, 1.0)

        ks = kstest(y, cdf)
        rows.append({"check": "exponential-shift", "detail": f"p={p_log}",
                     "statistic": float(ks.pvalue), "threshold": alpha,
                     "passed": bool(ks.pvalue > alpha)})

    uniform_cases = ((2.0, 3.0, 1.0), (0.5, 0.5, 50.0), (1.0, 1.0, 5.0),
                     (0.05, 0.2, 800.0), (3.0, 0.5, 0.0))
    for a, b, t in uniform_cases:
        g = GammaShapeRate(a, b)
        x = sample_truncated_gamma(TruncatedGammaSpec(g, t), rng, n)
        u = np.exp(gamma_log_upper_cdf(x, g) - gamma_log_upper_cdf(t, g))
        ks = kstest(u, "uniform")
        rows.append({"check": "uniform-transform", "detail": f"a={a},b={b},t={t}",
                     "statistic": float(ks.pvalue), "threshold": alpha,
                     "passed": bool(ks.pvalue > alpha)})

    shift_cases = ((1.0, 3.0, 5.0), (2.0, 0.5, 2.5), (0.3, 1.0, 9.0),
                   (5.0, 0.1, 0.4), (1.5, 2.0, 6.0))
    for rate, lo, hi in shift_cases:
        y = sample_truncated_exponential(rate, lo, hi, rng, n)

        def cdf(v, rate=rate, lo=lo, hi=hi):
            num = np.exp(-rate * lo) - np.exp(-rate * np.clip(v, lo, hi))
            den = np.exp(-rate * lo) - np.exp(-rate * hi)
            return np.clip(num / den, 0.0, 1.0)

        ks = kstest(y, cdf)
        rows.append({"check": "exponential-window", "detail": f"rate={rate},[{lo},{hi})",
                     "statistic": float(ks.pvalue), "threshold": alpha,
                     "passed": bool(ks.pvalue > alpha)})

    modulo_cases = ((1.0, 1.0), (2.0, 0.3), (0.5, 4.0), (1.0, 0.05), (3.0, 2.0))
    for rate, width in modulo_cases:
        y = sample_truncated_exponential(rate, 0.0, width, rng, n)

        def cdf(v, rate=rate, width=width):
            num = -np.expm1(-rate * np.clip(v, 0.0, width))
            den = -np.expm1(-rate * width)
            return np.clip(num / den, 0.0, 1.0)

        ks = kstest(y, cdf)
        rows.append({"check": "exponential-modulo", "detail": f"rate={rate},a={width}",
                     "statistic": float(ks.pvalue), "threshold": alpha,
                     "passed": bool(ks.pvalue > alpha)})

    for lam, beta in ((-0.1, 1.0), (-1.0, 2.0), (-0.001, 1e-4), (-0.5, 0.5)):
        rep = check_proposition1(StandardParams(lam, beta), max(n, 10_000), rng)
        rows.append({"check": "two-stage-equivalence", "detail": f"lam={lam},beta={beta}",
                     "statistic": rep.pvalue, "threshold": alpha,
                     "passed": rep.passed})

    dom_rng = np.random.default_rng([spec.seed, 778])
    for _ in range(20):
        lam = -float(np.exp(dom_rng.uniform(np.log(1e-3), np.log(2.0))))
        beta = float(np.exp(dom_rng.uniform(np.log(1e-4), np.log(2.0))))
        sp = StandardParams(lam, beta)
        eps0 = float(dom_rng.uniform(0.05, 0.95))
        env = build_envelope(sp, find_cutoffs_by_rate(sp, CutoffSearchConfig(eps0)))
        grid = np.exp(np.linspace(np.log(1e-6), np.log(1e6), 10_000)) / beta
        f_exact = inv_gamma_cdf(grid, sp.gamma())
        idx = np.searchsorted(env.cutoffs, grid, side="right")
        violations = int(np.sum(env.seg_cdf[idx] < f_exact))
        rows.append({"check": "envelope-domination",
                     "detail": f"lam={lam:.4g},beta={beta:.4g},eps0={eps0:.3f}",
                     "statistic": violations, "threshold": 0,
                     "passed": violations == 0})

    guar_rng = np.random.default_rng([spec.seed, 779])
    for lam, beta, eps0 in ((-0.001, 1e-4, 0.25), (-0.01, 0.01, 0.5),
                            (-0.1, 0.1, 0.1), (-1.0, 0.1, 0.75)):
        sp = StandardParams(lam, beta)
        env = build_envelope(sp, find_cutoffs_by_rate(sp, CutoffSearchConfig(eps0)))
        stats = measure_acceptance(sp, env, n, guar_rng)
        sigma = math.sqrt(eps0 * (1 - eps0) / n)
        bound = 1.0 - eps0 - 3.0 * sigma
        rows.append({"check": "acceptance-guarantee",
                     "detail": f"lam={lam},beta={beta},eps0={eps0}",
                     "statistic": stats.acceptance_rate, "threshold": bound,
                     "passed": stats.acceptance_rate >= bound})

    return _payload(spec, rows)


RUNNERS = {
    "acceptance-grid": run_acceptance_grid,
    "quantile-check": run_quantile_check,
    "cutoff-curve": run_cutoff_curve,
    "timing-grid": run_timing_grid,
    "rejection-grid": run_rejection_constant_grid,
    "validate": run_validate,
}
