"""Figure rendering for the CLI report paths.

All functions render to a file with the non-interactive Agg backend and
return the path; nothing ever opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, ax, out_path, xlabel, ylabel, title):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def bifurcation_diagram(alphas, sets, out_path, bif_points=(),
                        xlabel="alpha", title="minimal invariant sets"):
    """Vertical component segments per parameter, bifurcations marked."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for alpha, union in zip(alphas, sets):
        if union is None:
            continue
        for lo, hi in union.components:
            ax.plot([alpha, alpha], [lo, hi], color="C0", lw=2.2,
                    solid_capstyle="round")
    for point in bif_points:
        ax.axvline(point, color="C3", ls="--", lw=1.0)
    return _finish(fig, ax, out_path, xlabel, "x", title)


def warning_plot(rows, out_path, threshold=0.95):
    """Estimated extremal-map derivative across the sweep."""
    ok = [r for r in rows if r.error is None]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([r.alpha for r in ok], [r.D for r in ok], "o-", color="C0",
            label="estimated derivative")
    flagged = [r for r in ok if r.flag]
    if flagged:
        ax.plot([r.alpha for r in flagged], [r.D for r in flagged], "o",
                color="C3", label="flagged")
    ax.axhline(threshold, color="C3", ls="--", lw=1.0, label="threshold")
    ax.axhline(1.0, color="0.4", ls=":", lw=1.0)
    ax.legend()
    return _finish(fig, ax, out_path, "alpha", "D", "early-warning scan")


def series_plot(series, out_path, max_points=5000):
    """Time series trace (thinned) plus a marginal histogram."""
    x = series.samples
    stride = max(1, len(x) // max_points)
    fig, (ax, axh) = plt.subplots(
        1, 2, figsize=(8, 3.6), width_ratios=[3, 1], sharey=True
    )
    ax.plot(np.arange(len(x))[::stride], x[::stride], lw=0.6, color="C0")
    axh.hist(x, bins=80, orientation="horizontal", color="C0")
    axh.set_xlabel("count")
    return _finish(fig, ax, out_path, "step", "x", "simulated series")


def return_map_plot(samples, out_path, title="return map"):
    """z_in vs z_out scatter against the identity line."""
    z_in = np.array([s.z_in for s in samples])
    z_out = np.array([s.z_out for s in samples])
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(z_in, z_out, ".", ms=3, color="C0")
    lo = min(z_in.min(), z_out.min())
    hi = max(z_in.max(), z_out.max())
    ax.plot([lo, hi], [lo, hi], color="0.4", lw=0.8)
    return _finish(fig, ax, out_path, "z", "next z", title)


def koper_sweep_plot(sweep, out_path):
    return bifurcation_diagram(
        sweep.lambdas, sweep.sets, out_path,
        bif_points=sweep.jump_lambdas, xlabel="lambda",
        title="return-map invariant sets",
    )


def derivative_plot(rows, out_path):
    """Boundary-derivative estimate d_lambda across the sweep."""
    ok = [r for r in rows if r.error is None and np.isfinite(r.d_lambda)]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([r.lam for r in ok], [r.d_lambda for r in ok], "o-", color="C0")
    ax.axhline(1.0, color="C3", ls="--", lw=1.0)
    finite = [r.d_lambda for r in ok]
    if finite:
        lo = min(min(finite), 0.0)
        ax.set_ylim(lo - 0.1, max(1.6, max(finite) + 0.1))
    return _finish(fig, ax, out_path, "lambda", "d_lambda",
                   "lower-boundary derivative")
