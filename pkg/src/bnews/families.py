"""Built-in map families used by the worked examples, tests and CLI.

All families are supplied with analytic first and second derivatives so
that the sufficient-condition test and tangency location can run on them.
"""

from __future__ import annotations

import numpy as np

from .setvalued import SetValuedMapFamily, additive_family


def pitchfork_parts(alpha):
    """Scalar map alpha/2 * arctan(x) + x/2 with derivatives."""
    f = lambda x: 0.5 * alpha * np.arctan(x) + 0.5 * x
    df = lambda x: 0.5 * alpha / (1.0 + np.asarray(x) ** 2) + 0.5
    d2f = lambda x: -alpha * np.asarray(x) / (1.0 + np.asarray(x) ** 2) ** 2
    return f, df, d2f


def pitchfork_family(sigma=0.5, domain=(-8.0, 8.0),
                     alpha_domain=(1.2, 4.0)) -> SetValuedMapFamily:
    """Set-valued pitchfork: two invariant sets merge into one as alpha drops."""
    return additive_family(pitchfork_parts, sigma, domain, alpha_domain)


def doubling_parts(alpha):
    """Quadratic map -x^2 + alpha with derivatives."""
    f = lambda x: -np.asarray(x) ** 2 + alpha
    df = lambda x: -2.0 * np.asarray(x)
    d2f = lambda x: -2.0 * np.ones_like(np.asarray(x, dtype=float))
    return f, df, d2f


def doubling_family(sigma=0.015, domain=(0.05, 1.05),
                    alpha_domain=(0.6, 0.90)) -> SetValuedMapFamily:
    """Quadratic family: one invariant interval splits into a 2-cycle pair.

    The domain covers the positive branch studied in the worked example;
    the extremal maps are order-reversing there.
    """
    return additive_family(doubling_parts, sigma, domain, alpha_domain)


def linear_parts(slope, offset=0.0):
    def parts(alpha):
        f = lambda x: slope * np.asarray(x) + offset + alpha
        df = lambda x: slope * np.ones_like(np.asarray(x, dtype=float))
        d2f = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return f, df, d2f
    return parts


def linear_family(slope=0.5, sigma=1.0, domain=(-10.0, 10.0),
                  alpha_domain=(-1.0, 1.0)) -> SetValuedMapFamily:
    """Contracting affine family; never bifurcates (scan control case)."""
    return additive_family(linear_parts(slope), sigma, domain, alpha_domain)


BUILTIN_FAMILIES = {
    "pitchfork": pitchfork_family,
    "doubling": doubling_family,
    "linear": linear_family,
}
