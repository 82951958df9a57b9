"""Finite unions of closed intervals and the exact Hausdorff distance.

These are the set representations used for minimal invariant sets: sorted,
pairwise disjoint closed intervals, canonicalised so that floating-point
dust (gaps below ``MERGE_GAP``) never produces spurious components.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidArgumentError

#: Gaps narrower than this are merged during canonicalisation.
MERGE_GAP = 1e-12


@dataclass(frozen=True)
class IntervalUnion:
    """A finite union of disjoint closed intervals [lo, hi], sorted by lo."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "components", _canonicalise(self.components)
        )

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "IntervalUnion":
        return cls(tuple((float(a), float(b)) for a, b in pairs))

    @classmethod
    def single(cls, lo: float, hi: float) -> "IntervalUnion":
        return cls(((float(lo), float(hi)),))

    @property
    def is_empty(self) -> bool:
        return len(self.components) == 0

    @property
    def lo(self) -> float:
        return self.components[0][0]

    @property
    def hi(self) -> float:
        return self.components[-1][1]

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def contains(self, x: float, pad: float = 0.0) -> bool:
        return any(a - pad <= x <= b + pad for a, b in self.components)

    def dist(self, x: float) -> float:
        """Distance of the point x to the set."""
        if self.is_empty:
            raise InvalidArgumentError("distance to an empty set is undefined")
        best = float("inf")
        for a, b in self.components:
            if x < a:
                best = min(best, a - x)
            elif x > b:
                best = min(best, x - b)
            else:
                return 0.0
        return best

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.components + other.components)

    def measure(self) -> float:
        return sum(b - a for a, b in self.components)

    def to_json(self) -> str:
        return json.dumps([[a, b] for a, b in self.components])

    @classmethod
    def from_json(cls, text: str) -> "IntervalUnion":
        return cls.from_pairs(json.loads(text))


def _canonicalise(components) -> tuple[tuple[float, float], ...]:
    items = []
    for a, b in components:
        a, b = float(a), float(b)
        if not (a <= b):
            raise InvalidArgumentError(f"interval [{a}, {b}] has lo > hi")
        items.append((a, b))
    items.sort()
    merged: list[list[float]] = []
    for a, b in items:
        if merged and a <= merged[-1][1] + MERGE_GAP:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def semi_distance(a: IntervalUnion, b: IntervalUnion) -> float:
    """One-sided Hausdorff semi-distance d(A|B) = sup_{x in A} dist(x, B).

    Exact for interval unions: the supremum is attained either at an
    endpoint of A or at a midpoint of a gap of B lying inside A.
    """
    if a.is_empty or b.is_empty:
        raise InvalidArgumentError("Hausdorff distance needs nonempty sets")
    candidates = []
    for lo, hi in a.components:
        candidates.append(lo)
        candidates.append(hi)
    # Midpoints of the gaps of B realise local maxima of dist(., B).
    for (_, hi_prev), (lo_next, _) in zip(b.components, b.components[1:]):
        mid = 0.5 * (hi_prev + lo_next)
        if a.contains(mid):
            candidates.append(mid)
    return max(b.dist(x) for x in candidates)


def hausdorff(a: IntervalUnion, b: IntervalUnion) -> float:
    """Hausdorff distance between two nonempty interval unions."""
    return max(semi_distance(a, b), semi_distance(b, a))
