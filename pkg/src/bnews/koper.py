"""Stochastic return map of the Koper fast-slow oscillator.

The model is a three-dimensional ODE with one fast variable, integrated as
an explicit Euler map with bounded additive noise injected per step (the
noisy system is defined as this map, not as an SDE).  Orbits launched on
the section x = -4/5 are followed until they re-cross x = -3/4 with y < 0;
the z coordinate at the crossing defines the (stochastic) return map whose
minimal invariant sets and extremal-map derivative are studied here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .errors import (
    DivergenceError,
    InvalidArgumentError,
    NoReturnError,
    NotFoundError,
)
from .intervals import IntervalUnion, hausdorff
from .rdsim import TimeSeries, split_seeds

#: Correlation structure of the three noise channels (scaled by sigma).
NOISE_MIX = ((1.0, 0.5, 0.2), (0.5, 1.0, 0.3), (0.2, 0.3, 1.0))

#: Parameter window of the studied mixed-mode regime.
LAMBDA_WINDOW = (-8.0, -23.0 / 6.0)

_STATUS_OK = 0
_STATUS_NO_RETURN = 1
_STATUS_DIVERGED = 2


@dataclass(frozen=True)
class KoperConfig:
    # time-scale separation; at 0.01 the deterministic return-map fixed
    # point undergoes its tangency at lambda ~= -6.86 (calibration knob)
    eps: float = 0.01
    k: float = -10.0
    lam: float = -6.9
    dt: float = 1e-3
    sigma: float = 0.0
    seed: int = 0
    mix: tuple = NOISE_MIX
    #: Where the bounded kicks A*u, u uniform in [-1,1]^3, enter.
    #: "section": one kick per section-to-section flight, applied to the
    #: launch state; the stochastic return map is then a one-dimensional
    #: bounded-noise random map, the object the set-valued analysis is
    #: built for.  "step": one kick per noise_dt of integrated time (the
    #: literal per-step random map); kicks landing in the small-oscillation
    #: phase near the folded node are amplified so strongly that the
    #: invariant-set structure washes out at sigma = 0.01, so this mode is
    #: kept for model-fidelity checks, not for the sweeps.
    noise_mode: str = "section"
    #: Time step (t - s) between kicks in "step" mode.  The drift between
    #: kicks is resolved with Euler substeps of length dt, so the noise
    #: amplitude is a property of the map, not of the integration accuracy.
    noise_dt: float = 0.5

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")
        if self.noise_dt < self.dt:
            raise InvalidArgumentError("noise_dt must be at least dt")
        if self.noise_mode not in ("section", "step"):
            raise InvalidArgumentError("noise_mode must be 'section' or 'step'")
        if self.eps <= 0:
            raise InvalidArgumentError("eps must be positive")
        if self.sigma < 0:
            raise InvalidArgumentError("sigma must be nonnegative")
        if not LAMBDA_WINDOW[0] < self.lam < LAMBDA_WINDOW[1]:
            raise InvalidArgumentError(
                f"lambda={self.lam} outside the studied window {LAMBDA_WINDOW}"
            )

    @property
    def noise_matrix(self) -> np.ndarray:
        return self.sigma * np.asarray(self.mix, dtype=float)


@dataclass(frozen=True)
class SectionSpec:
    x_section: float = -0.8
    y0: float = -2.0
    y_range: tuple = (-3.0, -1.0)
    z_range: tuple = (-9.0, -7.0)
    x_detect: float = -0.75  # crossing threshold; offset prevents retrigger
    min_return_time: float = 1.0

    def __post_init__(self):
        if not self.z_range[0] < self.z_range[1]:
            raise InvalidArgumentError("z_range must satisfy z0 < z1")


@dataclass(frozen=True)
class ReturnSample:
    z_in: float
    z_out: float
    crossing_time: int  # Euler steps until the section crossing
    early_return_flag: bool


def vector_field(state, cfg: KoperConfig):
    x, y, z = state
    return np.array(
        [
            y - x**3 + 3.0 * x,
            cfg.eps * (cfg.k * x - 2.0 * (y + cfg.lam) + z),
            cfg.eps * (cfg.lam + y - z),
        ]
    )


def koper_step(state, cfg: KoperConfig, noise_increment=None):
    """One Euler step of the noisy map; sigma=0 is the deterministic step."""
    state = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(state)):
        raise InvalidArgumentError("state must be finite")
    new = state + vector_field(state, cfg) * cfg.dt
    if noise_increment is not None:
        u = np.asarray(noise_increment, dtype=float)
        if np.any(np.abs(u) > 1.0):
            raise InvalidArgumentError("noise increments must lie in [-1, 1]^3")
        new = new + cfg.noise_matrix @ u
    return new


def critical_manifold_y(x):
    """y = x^3 - 3x, the equilibrium branch of the fast subsystem."""
    return np.asarray(x) ** 3 - 3.0 * np.asarray(x)


def folded_singularities(lam):
    """The two fold points organising the small oscillations."""
    return (
        np.array([1.0, 2.0, 2.0 * lam + 6.0]),
        np.array([-1.0, -2.0, 2.0 * lam - 6.0]),
    )


@njit(cache=True, nogil=True)
def _return_kernel(
    x, y, z, eps, k, lam, dt, A, use_noise, kick_every, seed,
    x_detect, max_steps, guard_xy, guard_z_lo, guard_z_hi,
):
    if use_noise:
        np.random.seed(seed)
    for n in range(1, max_steps + 1):
        fx = y - x * x * x + 3.0 * x
        fy = eps * (k * x - 2.0 * (y + lam) + z)
        fz = eps * (lam + y - z)
        nx = x + fx * dt
        ny = y + fy * dt
        nz = z + fz * dt
        if use_noise and n % kick_every == 0:
            u0 = np.random.uniform(-1.0, 1.0)
            u1 = np.random.uniform(-1.0, 1.0)
            u2 = np.random.uniform(-1.0, 1.0)
            nx += A[0, 0] * u0 + A[0, 1] * u1 + A[0, 2] * u2
            ny += A[1, 0] * u0 + A[1, 1] * u1 + A[1, 2] * u2
            nz += A[2, 0] * u0 + A[2, 1] * u1 + A[2, 2] * u2
        if ny < 0.0 and x > x_detect and nx <= x_detect:
            t = (x_detect - x) / (nx - x)
            return z + t * (nz - z), n, _STATUS_OK
        if (
            abs(nx) > guard_xy
            or abs(ny) > guard_xy
            or nz < guard_z_lo
            or nz > guard_z_hi
        ):
            return nz, n, _STATUS_DIVERGED
        x, y, z = nx, ny, nz
    return z, max_steps, _STATUS_NO_RETURN


def _run_return(z_in, cfg, section, max_steps, seed):
    x0, y0, z0 = section.x_section, section.y0, float(z_in)
    step_noise = cfg.sigma > 0.0 and cfg.noise_mode == "step"
    if cfg.sigma > 0.0 and cfg.noise_mode == "section":
        u = np.random.default_rng(seed).uniform(-1.0, 1.0, 3)
        kick = cfg.noise_matrix @ u
        x0, y0, z0 = x0 + kick[0], y0 + kick[1], z0 + kick[2]
    return _return_kernel(
        x0,
        y0,
        z0,
        cfg.eps,
        cfg.k,
        cfg.lam,
        cfg.dt,
        cfg.noise_matrix,
        step_noise,
        max(1, int(round(cfg.noise_dt / cfg.dt))),
        int(seed) & 0x7FFFFFFF,
        section.x_detect,
        max_steps,
        6.0,
        section.z_range[0] - 3.0,
        section.z_range[1] + 3.0,
    )


def return_map_sample(
    z_in, cfg: KoperConfig, section: SectionSpec, max_steps=5_000_000,
    seed: Optional[int] = None,
) -> ReturnSample:
    """One section-to-section passage, launched at (x_section, y0, z_in)."""
    lo, hi = section.z_range
    if not lo <= z_in <= hi:
        raise InvalidArgumentError(f"z_in={z_in} outside z_range {section.z_range}")
    z_out, steps, status = _run_return(
        z_in, cfg, section, max_steps, cfg.seed if seed is None else seed
    )
    if status == _STATUS_NO_RETURN:
        raise NoReturnError(f"no section crossing within {max_steps} steps")
    if status == _STATUS_DIVERGED:
        raise DivergenceError(
            f"orbit escaped the guard box after {steps} steps",
            escape_index=steps,
        )
    early = steps * cfg.dt < section.min_return_time
    return ReturnSample(float(z_in), float(z_out), int(steps), early)


def deterministic_return_map(cfg: KoperConfig, section: SectionSpec, z_values,
                             max_steps=5_000_000):
    """p_lambda on a grid of z values (sigma forced to 0)."""
    det = replace(cfg, sigma=0.0)
    return np.array(
        [return_map_sample(z, det, section, max_steps).z_out for z in z_values]
    )


@dataclass
class ReturnCloud:
    samples: list[ReturnSample]
    errors: list[tuple[float, str]]

    def min_max_by_z(self):
        """Pointwise min/max of z_out per z_in: the extremal-map envelope."""
        by_z: dict[float, list[float]] = {}
        for s in self.samples:
            by_z.setdefault(s.z_in, []).append(s.z_out)
        zs = sorted(by_z)
        return (
            np.array(zs),
            np.array([min(by_z[z]) for z in zs]),
            np.array([max(by_z[z]) for z in zs]),
        )


def stochastic_return_cloud(
    cfg: KoperConfig,
    section: SectionSpec,
    z_grid: Sequence[float],
    n_per_z: int,
    max_steps=5_000_000,
) -> ReturnCloud:
    """Independent noisy return samples on a z grid (split seeds per sample).

    Raises if fewer than 90% of the samples complete; individual failures
    are recorded in the cloud either way.
    """
    if n_per_z < 1:
        raise InvalidArgumentError("n_per_z must be at least 1")
    seeds = split_seeds(cfg.seed, len(z_grid) * n_per_z)
    samples, errors = [], []
    idx = 0
    for z in z_grid:
        for _ in range(n_per_z):
            try:
                samples.append(
                    return_map_sample(z, cfg, section, max_steps, seed=seeds[idx])
                )
            except Exception as exc:
                errors.append((float(z), str(exc)))
            idx += 1
    total = len(samples) + len(errors)
    if total and len(samples) < 0.9 * total:
        raise DivergenceError(
            f"only {len(samples)}/{total} return samples succeeded"
        )
    return ReturnCloud(samples, errors)


def return_orbit(
    cfg: KoperConfig,
    section: SectionSpec,
    z0: float,
    n_returns: int,
    max_steps=5_000_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Orbit of the stochastic return map: z values and early-return flags."""
    seeds = split_seeds(cfg.seed, n_returns)
    zs = np.empty(n_returns)
    early = np.zeros(n_returns, dtype=bool)
    z = float(z0)
    lo, hi = section.z_range
    for i in range(n_returns):
        z_clamped = min(max(z, lo), hi)
        s = return_map_sample(z_clamped, cfg, section, max_steps, seed=seeds[i])
        z = s.z_out
        zs[i] = z
        early[i] = s.early_return_flag
    return zs, early


def _support_components(values, gap_tol) -> IntervalUnion:
    zs = np.sort(np.asarray(values, dtype=float))
    pieces = []
    start = zs[0]
    prev = zs[0]
    for z in zs[1:]:
        if z - prev > gap_tol:
            pieces.append((start, prev))
            start = z
        prev = z
    pieces.append((start, prev))
    return IntervalUnion.from_pairs(pieces)


@dataclass
class SweepResult:
    lambdas: list[float]
    sets: list[Optional[IntervalUnion]]
    errors: list[Optional[str]]
    hausdorff_steps: list[Optional[float]]
    jump_lambdas: list[float]

    def as_dict(self):
        return {
            lam: s for lam, s in zip(self.lambdas, self.sets) if s is not None
        }


def invariant_set_sweep(
    cfg_base: KoperConfig,
    section: SectionSpec,
    lambda_grid: Sequence[float],
    orbit_length=300,
    burn_returns=50,
    gap_tol=0.05,
    jump_tol=5.0,
    threads=1,
) -> SweepResult:
    """Empirical minimal invariant set of the return map across lambda.

    One long return-map orbit per lambda; the post-burn-in support,
    split at gaps wider than gap_tol, approximates the minimal invariant
    set.  Jumps are flagged where the Hausdorff step between consecutive
    lambdas exceeds jump_tol times the median step.
    """
    lambdas = [float(l) for l in lambda_grid]
    z0 = 0.5 * (section.z_range[0] + section.z_range[1])
    lam_seeds = split_seeds(cfg_base.seed, len(lambdas))

    def one(i_lam):
        i, lam = i_lam
        cfg = replace(cfg_base, lam=lam, seed=lam_seeds[i])
        try:
            zs, early = return_orbit(cfg, section, z0, orbit_length + burn_returns)
            keep = zs[burn_returns:][~early[burn_returns:]]
            if len(keep) < max(10, orbit_length // 10):
                raise NoReturnError("too few non-early returns in the orbit")
            return _support_components(keep, gap_tol), None
        except Exception as exc:
            return None, str(exc)

    tasks = list(enumerate(lambdas))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, tasks))
    else:
        outcomes = [one(t) for t in tasks]
    sets = [s for s, _ in outcomes]
    errors = [e for _, e in outcomes]
    steps: list[Optional[float]] = []
    for a, b in zip(sets, sets[1:]):
        steps.append(hausdorff(a, b) if a is not None and b is not None else None)
    valid = [s for s in steps if s is not None]
    jumps = []
    if valid:
        base = max(float(np.median(valid)), 1e-6)
        for i, s in enumerate(steps):
            if s is not None and s > jump_tol * base:
                jumps.append(0.5 * (lambdas[i] + lambdas[i + 1]))
    return SweepResult(lambdas, sets, errors, steps, jumps)


@dataclass
class DerivativeRow:
    lam: float
    d_lambda: float = float("nan")
    n_ok: int = 0
    boundary: float = float("nan")
    estimator_D: float = float("nan")
    error: Optional[str] = None


def boundary_derivative_sweep(
    cfg_base: KoperConfig,
    section: SectionSpec,
    lambda_grid: Sequence[float],
    n_real=500,
    eps_fd=0.01,
    supports: Optional[dict] = None,
    sweep_kwargs: Optional[dict] = None,
    max_steps=5_000_000,
    estimator_policy=None,
) -> list[DerivativeRow]:
    """Common-random-number derivative of f- at the lower set boundary.

    For each lambda the same noise realization drives a pair of returns
    launched at the boundary m and at m + eps_fd; the difference of the
    pointwise minima over realizations, divided by eps_fd, estimates the
    lower extremal-map slope.  When orbit data is available the additive
    time-series estimator runs on it as a data-driven cross-check.
    """
    from . import estimator as est_mod

    lambdas = [float(l) for l in lambda_grid]
    if supports is None:
        sweep = invariant_set_sweep(
            cfg_base, section, lambdas, **(sweep_kwargs or {})
        )
        supports = sweep.as_dict()
    rows = []
    for i, lam in enumerate(lambdas):
        row = DerivativeRow(lam=lam)
        sup = supports.get(lam)
        if sup is None:
            row.error = "boundary unavailable at this lambda"
            rows.append(row)
            continue
        m = sup.lo
        row.boundary = m
        cfg = replace(cfg_base, lam=lam)
        seeds = split_seeds((cfg_base.seed, i, 0xC12), n_real)
        z_min = math.inf
        w_min = math.inf
        n_ok = 0
        for s in seeds:
            z_out, _, st1 = _run_return(m, cfg, section, max_steps, s)
            w_out, _, st2 = _run_return(m + eps_fd, cfg, section, max_steps, s)
            if st1 == _STATUS_OK and st2 == _STATUS_OK:
                z_min = min(z_min, z_out)
                w_min = min(w_min, w_out)
                n_ok += 1
        if n_ok == 0:
            row.error = "all realization pairs failed"
            rows.append(row)
            continue
        row.d_lambda = (w_min - z_min) / eps_fd
        row.n_ok = n_ok
        if estimator_policy is not None:
            try:
                zs, early = return_orbit(
                    cfg, section, 0.5 * sum(section.z_range),
                    estimator_policy.get("orbit_length", 300),
                )
                series = TimeSeries(zs[~early], {"lam": lam})
                window = est_mod.auto_window(
                    series, "lower",
                    estimator_policy.get("delta", 0.02),
                    estimator_policy.get("gap", 0.01),
                )
                row.estimator_D = est_mod.estimate_additive(
                    series, window, estimator_policy.get("k_min", 5)
                ).D
            except Exception:
                pass  # cross-check is best-effort; d_lambda stands alone
        rows.append(row)
    return rows


def deterministic_derivative_at_fixed_point(
    cfg: KoperConfig,
    section: SectionSpec,
    tol=1e-9,
    fd_step=1e-4,
    coarse_n=41,
    frozen_z: Optional[float] = None,
    max_steps=5_000_000,
):
    """Fixed point of the deterministic return map and its slope there.

    Past the bifurcation the fixed point is gone; the caller then supplies
    the frozen pre-bifurcation point via ``frozen_z`` (slope evaluated
    there), mirroring how the deterministic reference curve is continued.
    """
    if cfg.sigma != 0.0:
        raise InvalidArgumentError("deterministic derivative requires sigma=0")

    def p(z):
        return return_map_sample(z, cfg, section, max_steps).z_out

    if frozen_z is not None:
        return float(frozen_z), _central_slope(p, frozen_z, fd_step)
    lo, hi = section.z_range
    zs = np.linspace(lo, hi, coarse_n)
    r = np.array([p(z) - z for z in zs])
    bracket = None
    for i in range(coarse_n - 1):
        # attracting crossings only: residual decreasing through zero,
        # and no canard jump inside the bracket
        if r[i] > 0 > r[i + 1] and abs(r[i + 1] - r[i]) < 5 * (zs[1] - zs[0]):
            bracket = (zs[i], zs[i + 1])
            break
    if bracket is None:
        raise NotFoundError("no attracting fixed point of the return map found")
    a, b = bracket
    fa = p(a) - a
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = p(mid) - mid
        if abs(fm) <= tol or b - a < tol:
            a = b = mid
            break
        if fa * fm < 0:
            b = mid
        else:
            a, fa = mid, fm
    z_star = 0.5 * (a + b)
    return float(z_star), _central_slope(p, z_star, fd_step)


def _central_slope(p, z, h):
    return float((p(z + h) - p(z - h)) / (2.0 * h))
