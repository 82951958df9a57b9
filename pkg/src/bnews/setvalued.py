"""Interval-valued maps, minimal invariant sets and bifurcation tests.

A set-valued map on the line is represented by its two extremal scalar maps
(pointwise min and max of the image interval).  This module computes minimal
invariant sets of such maps, checks the derivative conditions under which a
minimal invariant set persists or undergoes a discontinuous jump, and scans
a parametrised family for such jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import (
    CapabilityError,
    ConvergenceFailureError,
    DegenerateMapError,
    InvalidArgumentError,
    NotFoundError,
    PreconditionViolationError,
)
from .intervals import IntervalUnion, hausdorff

ScalarMap = Callable[[np.ndarray], np.ndarray]

DEFAULT_GRID = 4096
MONOTONE_SAMPLES = 256


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalPair:
    """Extremal maps of one interval-valued map, with derivatives.

    Second derivatives are optional; they are only needed by the
    sufficient-condition test for a saddle-node of an extremal map.
    """

    f_minus: ScalarMap
    f_plus: ScalarMap
    d_f_minus: ScalarMap
    d_f_plus: ScalarMap
    d2_f_minus: Optional[ScalarMap] = None
    d2_f_plus: Optional[ScalarMap] = None

    def validate(self, domain, n=MONOTONE_SAMPLES, rel_tol=1e-6, fd_step=1e-5):
        """Spot-check the interval structure and the supplied derivatives.

        Raises if f- exceeds f+ anywhere on the sample grid, if the image
        interval degenerates (no interior noise), or if an analytic
        derivative disagrees with a central finite difference.
        """
        xs = np.linspace(domain[0], domain[1], n)
        fm, fp = np.asarray(self.f_minus(xs)), np.asarray(self.f_plus(xs))
        gap = fp - fm
        if np.any(gap < 0):
            raise InvalidArgumentError("f_minus exceeds f_plus on the domain")
        if np.min(gap) <= 0:
            raise InvalidArgumentError(
                "image intervals degenerate on the domain (zero noise radius)"
            )
        for f, df in ((self.f_minus, self.d_f_minus), (self.f_plus, self.d_f_plus)):
            fd = (np.asarray(f(xs + fd_step)) - np.asarray(f(xs - fd_step))) / (2 * fd_step)
            an = np.asarray(df(xs))
            scale = np.maximum(np.abs(an), 1.0)
            if np.max(np.abs(an - fd) / scale) > rel_tol:
                raise InvalidArgumentError(
                    "analytic derivative disagrees with finite differences"
                )
        return float(np.min(gap))

    def image_of_interval(self, lo, hi, grid_n=DEFAULT_GRID):
        """Image interval of [lo, hi]: [min f-, max f+] over a fine grid."""
        xs = np.linspace(lo, hi, grid_n)
        return (
            float(np.min(np.asarray(self.f_minus(xs)))),
            float(np.max(np.asarray(self.f_plus(xs)))),
        )


@dataclass(frozen=True)
class SetValuedMapFamily:
    """Parameter-indexed family of extremal pairs on a working domain."""

    family: Callable[[float], ExtremalPair]
    alpha_domain: tuple[float, float]
    domain: tuple[float, float]

    def pair(self, alpha: float) -> ExtremalPair:
        lo, hi = self.alpha_domain
        if not (lo <= alpha <= hi):
            raise InvalidArgumentError(
                f"alpha={alpha} outside the family range [{lo}, {hi}]"
            )
        return self.family(alpha)

    def spot_check_continuity(self, n_alpha=9, n_x=64, h_alpha=1e-6, tol=1e-3):
        """Numerical spot check that the family varies continuously.

        Verifies that a small parameter perturbation moves both extremal
        maps by a proportionally small, x-uniform amount.
        """
        alphas = np.linspace(*self.alpha_domain, n_alpha + 2)[1:-1]
        xs = np.linspace(*self.domain, n_x)
        for a in alphas:
            p0, p1 = self.family(a), self.family(a + h_alpha)
            for f0, f1 in ((p0.f_minus, p1.f_minus), (p0.f_plus, p1.f_plus)):
                drift = np.max(np.abs(np.asarray(f1(xs)) - np.asarray(f0(xs))))
                if drift > tol:
                    raise InvalidArgumentError(
                        f"family not continuous near alpha={a}: drift {drift}"
                    )


class FixedPoint(NamedTuple):
    x: float
    slope: float
    stability: str  # "attracting" | "repelling" | "marginal"


@dataclass(frozen=True)
class InvariantSetCollection:
    """Minimal invariant set with per-component cycle structure.

    ``cycle[i]`` is the index of the component that component i is mapped
    onto by the set-valued map (identity for order-preserving maps).
    """

    sets: IntervalUnion
    cycle: tuple[int, ...]

    def __len__(self):
        return len(self.sets)


@dataclass
class BifurcationReport:
    alpha_star: float
    kind: str  # "boundary-saddle-node" | "composition-saddle-node" | "none"
    boundary_derivatives: Optional[tuple[float, float, float, float]] = None
    composition_derivatives: Optional[tuple[float, ...]] = None
    hausdorff_jump: float = 0.0
    components_before: int = 0
    components_after: int = 0
    error: Optional[str] = None


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def additive_family(f, sigma, domain, alpha_domain) -> SetValuedMapFamily:
    """Family obtained by fattening a scalar map family with radius sigma.

    ``f(alpha)`` must return ``(f_a, df_a)`` or ``(f_a, df_a, d2f_a)``;
    the extremal maps are the alpha-map shifted down/up by sigma and share
    its derivatives.
    """
    if sigma <= 0:
        raise InvalidArgumentError("noise radius sigma must be positive")

    def make_pair(alpha: float) -> ExtremalPair:
        parts = f(alpha)
        fa, dfa = parts[0], parts[1]
        d2fa = parts[2] if len(parts) > 2 else None
        return ExtremalPair(
            f_minus=lambda x, fa=fa: fa(x) - sigma,
            f_plus=lambda x, fa=fa: fa(x) + sigma,
            d_f_minus=dfa,
            d_f_plus=dfa,
            d2_f_minus=d2fa,
            d2_f_plus=d2fa,
        )

    return SetValuedMapFamily(make_pair, tuple(alpha_domain), tuple(domain))


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------

def fixed_points(g, dg, domain, tol=1e-12, grid_n=DEFAULT_GRID) -> list[FixedPoint]:
    """All fixed points of g on the domain, by sign bracketing + bisection.

    Roots closer together than the grid step are not separated; the grid
    resolution is the caller's knob.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise InvalidArgumentError("empty domain")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    xs = np.linspace(lo, hi, grid_n)
    r = np.asarray(g(xs)) - xs
    scale = max(1.0, float(np.max(np.abs(xs))))
    near_zero = np.abs(r) <= max(tol, 1e-9 * scale)
    if np.count_nonzero(near_zero) > grid_n // 2:
        raise DegenerateMapError(
            "map is numerically the identity on most of the domain"
        )
    roots = []
    for i in np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0):
        a, b = xs[i], xs[i + 1]
        fa = r[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = float(g(m)) - m
            if abs(fm) <= tol or (b - a) < 1e-15 * scale:
                break
            if fa * fm < 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    # grid nodes that are exact roots
    for i in np.flatnonzero(near_zero):
        x = float(xs[i])
        if not any(abs(x - rt) <= (hi - lo) / grid_n for rt in roots):
            roots.append(x)
    out = []
    for x in sorted(roots):
        s = float(dg(x))
        if abs(s) < 1.0:
            stab = "attracting"
        elif abs(s) > 1.0:
            stab = "repelling"
        else:
            stab = "marginal"
        out.append(FixedPoint(x, s, stab))
    return out


def monotonicity(pair: ExtremalPair, region, n=MONOTONE_SAMPLES) -> str:
    """'increasing', 'decreasing' or 'mixed' for both extremal maps jointly."""
    xs = np.linspace(region[0], region[1], n)
    dm = np.asarray(pair.d_f_minus(xs))
    dp = np.asarray(pair.d_f_plus(xs))
    if np.all(dm > 0) and np.all(dp > 0):
        return "increasing"
    if np.all(dm < 0) and np.all(dp < 0):
        return "decreasing"
    return "mixed"


def _critical_point(df, region, n=MONOTONE_SAMPLES):
    """A sign change of a derivative inside the region, if any."""
    xs = np.linspace(region[0], region[1], n)
    d = np.asarray(df(xs))
    idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)
    if len(idx) == 0:
        return None
    i = idx[0]
    a, b = xs[i], xs[i + 1]
    for _ in range(100):
        m = 0.5 * (a + b)
        if float(df(a)) * float(df(m)) < 0:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# minimal invariant sets
# ---------------------------------------------------------------------------

def minimal_invariant_sets_monotone(
    pair: ExtremalPair,
    domain,
    tol=1e-9,
    grid_n=DEFAULT_GRID,
    verify=True,
    oracle_grid=2048,
) -> IntervalUnion:
    """Minimal invariant sets of an order-preserving interval map.

    Each set is an interval [e1, e2] between an attracting fixed point of
    f- and the matching attracting fixed point of f+.
    """
    if monotonicity(pair, domain) != "increasing":
        raise PreconditionViolationError(
            "extremal maps are not strictly increasing on the domain"
        )
    fps_minus = [
        p for p in fixed_points(pair.f_minus, pair.d_f_minus, domain, tol, grid_n)
        if p.stability == "attracting"
    ]
    fps_plus = [
        p for p in fixed_points(pair.f_plus, pair.d_f_plus, domain, tol, grid_n)
        if p.stability == "attracting"
    ]
    if not fps_minus or not fps_plus:
        raise NotFoundError("no attracting fixed point of an extremal map in domain")
    components = []
    cursor = -np.inf
    for e1 in (p.x for p in fps_minus):
        if e1 <= cursor:
            continue  # inside a component already built
        e2 = next((q.x for q in fps_plus if q.x >= e1 - tol), None)
        if e2 is None:
            continue
        components.append((e1, e2))
        cursor = e2
    if not components:
        raise NotFoundError("fixed points do not pair into an invariant interval")
    result = IntervalUnion.from_pairs(components)
    if verify:
        cell = (domain[1] - domain[0]) / (oracle_grid - 1)
        for e1, e2 in result:
            seed = (0.5 * (e1 + e2) - cell, 0.5 * (e1 + e2) + cell)
            ref = set_iterate_oracle(pair, seed, domain, oracle_grid, 500, tol=cell)
            # the grid iteration stalls within ~cell/(1-L) of the true
            # boundary, L the boundary contraction rate
            L = max(abs(float(pair.d_f_minus(e1))), abs(float(pair.d_f_plus(e2))))
            allowed = cell * (2.0 + 1.0 / max(0.02, 1.0 - L))
            if len(ref) != 1 or hausdorff(ref, IntervalUnion.single(e1, e2)) > allowed:
                raise PreconditionViolationError(
                    f"candidate [{e1}, {e2}] failed the grid-iteration check"
                )
    return result


def minimal_invariant_sets_reversing(
    pair: ExtremalPair,
    domain,
    tol=1e-9,
    grid_n=DEFAULT_GRID,
) -> InvariantSetCollection:
    """Minimal invariant set(s) of an order-reversing interval map.

    Boundary points are fixed points of the compositions f+ o f- and
    f- o f+.  One attracting fixed point of each composition gives a single
    interval; two of each give a 2-cycle of intervals swapped by the map.
    """
    c1 = lambda x: pair.f_plus(pair.f_minus(x))
    dc1 = lambda x: pair.d_f_plus(pair.f_minus(x)) * pair.d_f_minus(x)
    c2 = lambda x: pair.f_minus(pair.f_plus(x))
    dc2 = lambda x: pair.d_f_minus(pair.f_plus(x)) * pair.d_f_plus(x)
    att1 = [p.x for p in fixed_points(c1, dc1, domain, tol, grid_n)
            if p.stability == "attracting"]
    att2 = [p.x for p in fixed_points(c2, dc2, domain, tol, grid_n)
            if p.stability == "attracting"]
    if len(att1) == 1 and len(att2) == 1:
        q_minus, q_plus = att2[0], att1[0]
        if not q_minus < q_plus:
            raise PreconditionViolationError(
                "composition fixed points are not ordered as expected"
            )
        collection = InvariantSetCollection(
            IntervalUnion.single(q_minus, q_plus), (0,)
        )
    elif len(att1) == 2 and len(att2) == 2:
        r1_plus, q_plus = att1
        q_minus, r2_minus = att2
        if not q_minus < r1_plus < r2_minus < q_plus:
            raise PreconditionViolationError(
                "composition fixed points are not interleaved as expected"
            )
        collection = InvariantSetCollection(
            IntervalUnion.from_pairs([(q_minus, r1_plus), (r2_minus, q_plus)]),
            (1, 0),
        )
    else:
        raise PreconditionViolationError(
            f"unexpected composition fixed-point counts "
            f"({len(att1)}, {len(att2)}); near a tangency or wrong domain"
        )
    # the construction is only valid while both maps reverse order on the set
    span = (collection.sets.lo, collection.sets.hi)
    if monotonicity(pair, span) != "decreasing":
        crit = _critical_point(pair.d_f_minus, span) or _critical_point(
            pair.d_f_plus, span
        )
        raise PreconditionViolationError(
            f"extremal maps are not order-reversing on the computed set; "
            f"critical point at x={crit}",
            location=crit,
        )
    return collection


def set_iterate_oracle(
    pair: ExtremalPair,
    seed_interval,
    domain,
    grid_n=DEFAULT_GRID,
    max_iter=500,
    tol=1e-6,
) -> IntervalUnion:
    """Brute-force invariant set by iterating a grid mask to a fixed set.

    Independent of the fixed-point constructors above; serves as their
    ground-truth check in tests.
    """
    if grid_n < 1000:
        raise InvalidArgumentError("oracle grid must have at least 1000 nodes")
    lo, hi = float(domain[0]), float(domain[1])
    s0, s1 = float(seed_interval[0]), float(seed_interval[1])
    if not (lo <= s0 <= s1 <= hi):
        raise InvalidArgumentError("seed interval must lie inside the domain")
    xs = np.linspace(lo, hi, grid_n)
    h = (hi - lo) / (grid_n - 1)
    fm = np.asarray(pair.f_minus(xs), dtype=float)
    fp = np.asarray(pair.f_plus(xs), dtype=float)
    mask = (xs >= s0 - h / 2) & (xs <= s1 + h / 2)
    if not mask.any():
        mask[np.argmin(np.abs(xs - 0.5 * (s0 + s1)))] = True
    last_distance = None
    for _ in range(max_iter):
        active = np.flatnonzero(mask)
        img_lo, img_hi = fm[active], fp[active]
        if img_lo.min() < lo - h / 2 or img_hi.max() > hi + h / 2:
            raise ConvergenceFailureError(
                "set image escaped the working domain", last_distance
            )
        start = np.round((img_lo - lo) / h).astype(int)
        stop = np.round((img_hi - lo) / h).astype(int)
        start = np.clip(start, 0, grid_n - 1)
        stop = np.clip(stop, 0, grid_n - 1)
        diff = np.zeros(grid_n + 1, dtype=int)
        np.add.at(diff, start, 1)
        np.add.at(diff, stop + 1, -1)
        new_mask = np.cumsum(diff[:-1]) > 0
        if np.array_equal(new_mask, mask):
            return _mask_components(new_mask, xs)
        last_distance = hausdorff(
            _mask_components(mask, xs), _mask_components(new_mask, xs)
        )
        mask = new_mask
        if last_distance < tol:
            return _mask_components(mask, xs)
    raise ConvergenceFailureError(
        f"set iteration did not converge in {max_iter} steps", last_distance
    )


def _mask_components(mask, xs) -> IntervalUnion:
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise ConvergenceFailureError("iterated set became empty")
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    stops = np.concatenate((breaks, [len(idx) - 1]))
    return IntervalUnion.from_pairs(
        [(xs[idx[a]], xs[idx[b]]) for a, b in zip(starts, stops)]
    )


# ---------------------------------------------------------------------------
# bifurcation conditions
# ---------------------------------------------------------------------------

def check_persistence(pair: ExtremalPair, E, tol=1e-3, grid_n=DEFAULT_GRID):
    """Persistence test: all four boundary derivatives strictly inside 1.

    Returns (persistent, (|f-'(e1)|, |f+'(e1)|, |f-'(e2)|, |f+'(e2)|)).
    """
    e1, e2 = float(E[0]), float(E[1])
    img = pair.image_of_interval(e1, e2, grid_n)
    if hausdorff(IntervalUnion.single(*img), IntervalUnion.single(e1, e2)) > tol:
        raise InvalidArgumentError("E is not invariant for the pair")
    derivs = (
        abs(float(pair.d_f_minus(e1))),
        abs(float(pair.d_f_plus(e1))),
        abs(float(pair.d_f_minus(e2))),
        abs(float(pair.d_f_plus(e2))),
    )
    return all(d < 1.0 - tol for d in derivs), derivs


@dataclass(frozen=True)
class SaddleNodeCheck:
    holds: bool
    monotone: bool
    slope: float
    curvature: float
    alpha_slope: float
    conditions: tuple[bool, bool, bool, bool]


def check_saddle_node_sufficient(
    family: SetValuedMapFamily,
    alpha0,
    e2,
    h_alpha=1e-6,
    tol=1e-6,
    side="upper",
    neighborhood=None,
) -> SaddleNodeCheck:
    """Sufficient condition for a discontinuous jump at a boundary point.

    ``side='upper'`` tests the saddle-node of f+ at the upper boundary e2;
    ``side='lower'`` the mirrored conditions of f- at the lower boundary
    (curvature and parameter slope signs flipped).
    """
    pair = family.pair(alpha0)
    if side == "upper":
        f_at, df_at, d2_at = (
            lambda p: p.f_plus, lambda p: p.d_f_plus, lambda p: p.d2_f_plus
        )
        curv_sign, alpha_sign = +1.0, +1.0
    elif side == "lower":
        f_at, df_at, d2_at = (
            lambda p: p.f_minus, lambda p: p.d_f_minus, lambda p: p.d2_f_minus
        )
        curv_sign, alpha_sign = -1.0, -1.0
    else:
        raise InvalidArgumentError("side must be 'upper' or 'lower'")
    if d2_at(pair) is None:
        raise CapabilityError("second derivatives are required for this test")
    if neighborhood is None:
        r = 0.05 * (family.domain[1] - family.domain[0])
        neighborhood = (
            max(family.domain[0], e2 - r),
            min(family.domain[1], e2 + r),
        )
    xs = np.linspace(neighborhood[0], neighborhood[1], MONOTONE_SAMPLES)
    mono = True
    for a in (alpha0 - h_alpha, alpha0, alpha0 + h_alpha):
        if np.any(np.asarray(df_at(family.pair(a))(xs)) <= 0):
            mono = False
            break
    slope = float(df_at(pair)(e2))
    curvature = float(d2_at(pair)(e2))
    p_lo = family.pair(alpha0 - h_alpha)
    p_hi = family.pair(alpha0 + h_alpha)
    alpha_slope = float(
        (f_at(p_hi)(e2) - f_at(p_lo)(e2)) / (2 * h_alpha)
    )
    conditions = (
        mono,
        abs(slope - 1.0) <= tol,
        curv_sign * curvature > 0,
        alpha_sign * alpha_slope > 0,
    )
    return SaddleNodeCheck(
        all(conditions), mono, slope, curvature, alpha_slope, conditions
    )


# ---------------------------------------------------------------------------
# tangency location
# ---------------------------------------------------------------------------

def locate_tangency(
    g_of_alpha,
    dg_of_alpha,
    region,
    alpha_lo,
    alpha_hi,
    kind="min",
    grid_n=DEFAULT_GRID,
    seed_bisections=40,
    tol=1e-12,
):
    """Parameter and point at which g_alpha becomes tangent to the identity.

    ``region`` is either a fixed (lo, hi) pair or a callable alpha -> (lo, hi)
    excluding any transversal fixed points; on one side of the tangency
    g(x) - x has no zero in the region, on the other side two.  ``kind`` is
    'min' when the tangency is a dip of g(x) - x touching zero from above,
    'max' for the mirrored case.  A sign bisection seeds a two-variable
    root solve of (g(x) - x, g'(x) - 1) = (0, 0).
    """
    region_fn = region if callable(region) else (lambda _a: region)

    def dip(alpha):
        lo, hi = region_fn(alpha)
        xs = np.linspace(lo, hi, grid_n)
        r = np.asarray(g_of_alpha(alpha)(xs)) - xs
        if kind == "min":
            i = int(np.argmin(r))
            return float(r[i]), float(xs[i])
        i = int(np.argmax(r))
        return float(-r[i]), float(xs[i])

    s_lo, x_lo = dip(alpha_lo)
    s_hi, x_hi = dip(alpha_hi)
    if s_lo * s_hi > 0:
        raise NotFoundError(
            "no tangency in the parameter bracket (dip does not change sign)"
        )
    a, b = float(alpha_lo), float(alpha_hi)
    sa = s_lo
    x_seed = x_lo if s_lo < 0 else x_hi
    for _ in range(seed_bisections):
        m = 0.5 * (a + b)
        sm, xm = dip(m)
        if sm < 0:
            x_seed = xm
        if sa * sm <= 0:
            b = m
        else:
            a, sa = m, sm
        if b - a < 1e-8:
            break
    alpha_seed = 0.5 * (a + b)

    def residual(v):
        x, alpha = v
        return [
            float(g_of_alpha(alpha)(x)) - x,
            float(dg_of_alpha(alpha)(x)) - 1.0,
        ]

    sol = optimize.root(residual, [x_seed, alpha_seed], tol=tol)
    if not sol.success:
        raise ConvergenceFailureError(f"tangency polish failed: {sol.message}")
    x_star, alpha_star = map(float, sol.x)
    return alpha_star, x_star


# ---------------------------------------------------------------------------
# parameter scan
# ---------------------------------------------------------------------------

def minimal_invariant_sets(family, alpha, domain=None, grid_n=DEFAULT_GRID):
    """Minimal invariant sets at one parameter, dispatched on monotonicity.

    Order-preserving extremal pairs use the boundary fixed-point
    constructor, order-reversing ones the composition constructor, and
    mixed pairs fall back to grid iteration.
    """
    if domain is None:
        domain = family.domain
    sets, _ = _invariant_sets_auto(family, alpha, domain, 1e-10, grid_n)
    return sets


def _invariant_sets_auto(family, alpha, domain, tol, grid_n):
    pair = family.pair(alpha)
    mode = monotonicity(pair, domain)
    if mode == "increasing":
        return minimal_invariant_sets_monotone(
            pair, domain, tol, grid_n, verify=False
        ), "increasing"
    if mode == "decreasing":
        return minimal_invariant_sets_reversing(pair, domain, tol, grid_n).sets, \
            "decreasing"
    return set_iterate_oracle(pair, domain, domain, max(grid_n, 1000)), "mixed"


def bifurcation_scan(
    family: SetValuedMapFamily,
    alpha_grid: Sequence[float],
    jump_tol=10.0,
    domain=None,
    tol=1e-3,
    grid_n=DEFAULT_GRID,
    refine_tol=1e-8,
) -> list[BifurcationReport]:
    """Scan a family for discontinuous jumps of its minimal invariant sets.

    A jump is flagged where the Hausdorff step between consecutive grid
    points exceeds ``jump_tol`` times the median step (a scale-free outlier
    rule), then refined by bisection and classified by the constructor that
    applies (boundary saddle-node for order-preserving maps, composition
    saddle-node for order-reversing ones).
    """
    alphas = [float(a) for a in alpha_grid]
    if alphas != sorted(alphas):
        raise InvalidArgumentError("alpha_grid must be sorted")
    if domain is None:
        domain = family.domain
    sets: list[Optional[IntervalUnion]] = []
    modes: list[Optional[str]] = []
    reports: list[BifurcationReport] = []
    for a in alphas:
        try:
            m, mode = _invariant_sets_auto(family, a, domain, 1e-10, grid_n)
            sets.append(m)
            modes.append(mode)
        except Exception as exc:  # error recorded, scan continues
            sets.append(None)
            modes.append(None)
            reports.append(
                BifurcationReport(alpha_star=a, kind="none", error=str(exc))
            )
    steps = []
    for m0, m1 in zip(sets, sets[1:]):
        steps.append(hausdorff(m0, m1) if m0 is not None and m1 is not None else None)
    valid = [s for s in steps if s is not None]
    if not valid:
        return reports
    baseline = max(float(np.median(valid)), 1e-9 * (domain[1] - domain[0]))
    for i, s in enumerate(steps):
        if s is None or s <= jump_tol * baseline:
            continue
        reports.append(
            _refine_jump(
                family, alphas[i], alphas[i + 1], sets[i], sets[i + 1],
                modes[i], domain, tol, grid_n, refine_tol,
            )
        )
    return reports


def _refine_jump(
    family, a_lo, a_hi, m_lo, m_hi, mode, domain, tol, grid_n, refine_tol
):
    jump = hausdorff(m_lo, m_hi)
    while a_hi - a_lo > refine_tol:
        mid = 0.5 * (a_lo + a_hi)
        try:
            m_mid, _ = _invariant_sets_auto(family, mid, domain, 1e-10, grid_n)
        except Exception:
            break
        if hausdorff(m_mid, m_lo) <= hausdorff(m_mid, m_hi):
            a_lo, m_lo = mid, m_mid
        else:
            a_hi, m_hi = mid, m_mid
    alpha_star = 0.5 * (a_lo + a_hi)
    # report derivatives at the boundary of the set(s) on the side with
    # more components (the configuration that disappears in the jump)
    if len(m_lo) >= len(m_hi):
        side_alpha, side_sets = a_lo, m_lo
    else:
        side_alpha, side_sets = a_hi, m_hi
    pair = family.pair(side_alpha)
    bd = _changed_component_derivatives(pair, side_sets, m_lo, m_hi)
    comp_derivs = None
    if mode == "decreasing":
        dc1 = lambda x: pair.d_f_plus(pair.f_minus(x)) * pair.d_f_minus(x)
        dc2 = lambda x: pair.d_f_minus(pair.f_plus(x)) * pair.d_f_plus(x)
        comp_derivs = tuple(
            float(d(e)) for e1, e2 in side_sets for d, e in ((dc2, e1), (dc1, e2))
        )
        kind = "composition-saddle-node"
    else:
        kind = "boundary-saddle-node"
    return BifurcationReport(
        alpha_star=alpha_star,
        kind=kind,
        boundary_derivatives=bd,
        composition_derivatives=comp_derivs,
        hausdorff_jump=jump,
        components_before=len(m_lo),
        components_after=len(m_hi),
    )


def _changed_component_derivatives(pair, side_sets, m_lo, m_hi):
    other = m_hi if side_sets is m_lo else m_lo
    for e1, e2 in side_sets:
        present = any(
            abs(e1 - a) < 1e-6 and abs(e2 - b) < 1e-6 for a, b in other
        )
        if not present:
            return (
                abs(float(pair.d_f_minus(e1))),
                abs(float(pair.d_f_plus(e1))),
                abs(float(pair.d_f_minus(e2))),
                abs(float(pair.d_f_plus(e2))),
            )
    e1, e2 = side_sets.components[0]
    return (
        abs(float(pair.d_f_minus(e1))),
        abs(float(pair.d_f_plus(e1))),
        abs(float(pair.d_f_minus(e2))),
        abs(float(pair.d_f_plus(e2))),
    )
