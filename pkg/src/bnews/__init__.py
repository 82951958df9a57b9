"""Bifurcation detection and early-warning signals for bounded-noise
random dynamical systems on the line."""

from . import (
    config,
    errors,
    estimator,
    families,
    intervals,
    koper,
    rdsim,
    setvalued,
)
from .intervals import IntervalUnion, hausdorff

__all__ = [
    "config",
    "errors",
    "estimator",
    "families",
    "intervals",
    "koper",
    "rdsim",
    "setvalued",
    "IntervalUnion",
    "hausdorff",
]

__version__ = "0.1.0"
