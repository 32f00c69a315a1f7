"""Figure rendering for benchmark reports.

Each experiment gets one figure, saved next to the delimited output.  All
rendering goes through the Agg backend so the CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
import matplotlib.pyplot as plt

_DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_acceptance_grid(payload, path):
    """Acceptance-rate heatmap per mode parameter, beta rows x lambda cols."""
    rows = [r for r in payload["results"] if r["error"] is None]
    if not rows:
        return None
    params = sorted({(r["eps0"], r["requested_cutoffs"]) for r in rows},
                    key=lambda t: (t[0] is None, t[0], t[1]))
    lams = sorted({r["lam"] for r in rows})
    betas = sorted({r["beta"] for r in rows})
    ncol = len(params)
    fig, axes = plt.subplots(1, ncol, figsize=(3.6 * ncol, 3.2), squeeze=False)
    for ax, par in zip(axes[0], params):
        grid = np.full((len(betas), len(lams)), np.nan)
        for r in rows:
            if (r["eps0"], r["requested_cutoffs"]) == par:
                grid[betas.index(r["beta"]), lams.index(r["lam"])] = r["acceptance_mean"]
        im = ax.imshow(grid, vmin=0, vmax=1, cmap="viridis", aspect="auto")
        for i in range(len(betas)):
            for j in range(len(lams)):
                if np.isfinite(grid[i, j]):
                    ax.text(j, i, f"{grid[i, j]:.3f}", ha="center", va="center",
                            fontsize=7, color="white")
        ax.set_xticks(range(len(lams)), [f"{v:g}" for v in lams], fontsize=7)
        ax.set_yticks(range(len(betas)), [f"{v:g}" for v in betas], fontsize=7)
        ax.set_xlabel("lambda")
        ax.set_ylabel("beta")
        mode = payload["spec"]["mode"]
        title = mode if par == (None, None) else (
            f"eps0={par[0]:g}" if par[0] is not None else f"K={par[1]}"
        )
        ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=axes[0], label="acceptance rate", shrink=0.85)
    return _save(fig, path)


def plot_quantile_check(payload, path):
    """Bar pairs of quadrature-exact vs simulated summary statistics."""
    rows = [r for r in payload["results"]
            if r["statistic"] not in ("ks_statistic", "ks_pvalue")]
    if not rows:
        return None
    names = [r["statistic"] for r in rows]
    actual = [r["actual"] for r in rows]
    sim = [r["simulated"] for r in rows]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(x - 0.18, actual, width=0.36, label="quadrature")
    ax.bar(x + 0.18, sim, width=0.36, label="simulated")
    ax.set_xticks(x, names)
    ax.set_ylabel("value")
    spec = payload["spec"]
    ax.set_title(
        f"GIG(lam={spec['lambdas'][0]:g}, psi={spec['psi']:g}, chi={spec['chi']:g}), "
        f"n={spec['draws']}", fontsize=9,
    )
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_cutoff_curve(payload, path):
    """Cutoff count against target rejection rate, one line per (lam, beta)."""
    rows = [r for r in payload["results"] if r["error"] is None]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    combos = sorted({(r["lam"], r["beta"]) for r in rows})
    for lam, beta in combos:
        pts = [(r["eps"], r["cutoff_count"]) for r in rows
               if (r["lam"], r["beta"]) == (lam, beta)]
        pts.sort()
        ax.step([p[0] for p in pts], [max(p[1], 0.5) for p in pts],
                where="post", lw=1, label=f"lam={lam:g}, beta={beta:g}")
    ax.set_yscale("log")
    ax.set_xlabel("target rejection rate")
    ax.set_ylabel("number of cutoff points")
    ax.legend(fontsize=6, frameon=False, ncol=2)
    return _save(fig, path)


def plot_timing_grid(payload, path):
    """log10 seconds-per-variate heatmap; black squares mark column minima."""
    rows = payload["results"]
    if not rows:
        return None
    eps0s = sorted({r["eps0"] for r in rows})
    sizes = sorted({r["n"] for r in rows})
    grid = np.full((len(eps0s), len(sizes)), np.nan)
    for r in rows:
        grid[eps0s.index(r["eps0"]), sizes.index(r["n"])] = r["log10_mean_seconds"]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    im = ax.imshow(grid, cmap="magma", aspect="auto")
    for r in rows:
        if r["column_min"]:
            ax.scatter(sizes.index(r["n"]), eps0s.index(r["eps0"]),
                       marker="s", s=90, facecolors="none", edgecolors="black", lw=1.6)
    ax.set_xticks(range(len(sizes)), [str(s) for s in sizes])
    ax.set_yticks(range(len(eps0s)), [f"{e:g}" for e in eps0s])
    ax.set_xlabel("sample size n")
    ax.set_ylabel("target rejection rate eps0")
    spec = payload["spec"]
    lam = spec["lambdas"][0] if spec["lambdas"] else 0.1
    beta = spec["betas"][0] if spec["betas"] else 0.1
    ax.set_title(f"log10 average seconds per variate (lam={lam:g}, beta={beta:g})",
                 fontsize=9)
    fig.colorbar(im, ax=ax, shrink=0.85)
    return _save(fig, path)


def plot_rejection_grid(payload, path):
    """Rejection-constant heatmaps over (lam, beta), one panel per count."""
    rows = [r for r in payload["results"] if r["error"] is None]
    if not rows:
        return None
    ks = sorted({r["requested_cutoffs"] for r in rows})
    lams = sorted({r["lam"] for r in rows})
    betas = sorted({r["beta"] for r in rows})
    ncol = min(3, len(ks))
    nrow = (len(ks) + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.4 * ncol, 3.0 * nrow),
                             squeeze=False)
    vmax = max(r["rejection_constant_mean"] for r in rows)
    im = None
    for i, k in enumerate(ks):
        ax = axes[i // ncol][i % ncol]
        grid = np.full((len(betas), len(lams)), np.nan)
        for r in rows:
            if r["requested_cutoffs"] == k:
                grid[betas.index(r["beta"]), lams.index(r["lam"])] = (
                    r["rejection_constant_mean"]
                )
        im = ax.imshow(grid, vmin=1.0, vmax=vmax, cmap="cividis", aspect="auto")
        ax.set_xticks(range(len(lams)), [f"{v:g}" for v in lams], fontsize=7)
        ax.set_yticks(range(len(betas)), [f"{v:g}" for v in betas], fontsize=7)
        ax.set_title(f"K = {k}", fontsize=9)
        ax.set_xlabel("lambda")
        ax.set_ylabel("beta")
    for j in range(len(ks), nrow * ncol):
        axes[j // ncol][j % ncol].axis("off")
    if im is not None:
        fig.colorbar(im, ax=axes, label="rejection constant", shrink=0.8)
    return _save(fig, path)


def plot_sample_histogram(values, params, path, pdf=None):
    """Histogram of draws with the exact density overlaid when available."""
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.hist(values, bins=min(100, max(10, len(values) // 50)), density=True,
            alpha=0.6, label="draws")
    if pdf is not None and len(values) > 1:
        xs = np.linspace(np.min(values), np.max(values), 400)
        xs = xs[xs > 0]
        ax.plot(xs, pdf(xs), lw=1.5, color="C3", label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(
        f"GIG(lam={params.lam:g}, psi={params.psi:g}, chi={params.chi:g}), "
        f"n={len(values)}", fontsize=9,
    )
    ax.legend(frameon=False)
    return _save(fig, path)


FIGURES = {
    "acceptance-grid": plot_acceptance_grid,
    "quantile-check": plot_quantile_check,
    "cutoff-curve": plot_cutoff_curve,
    "timing-grid": plot_timing_grid,
    "rejection-grid": plot_rejection_grid,
}
