import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnews.errors import InvalidArgumentError
from bnews.intervals import IntervalUnion, hausdorff, semi_distance


# ---------------------------------------------------------------------------
# construction and canonicalisation
# ---------------------------------------------------------------------------

def test_overlapping_components_merge():
    u = IntervalUnion.from_pairs([(0.0, 1.0), (0.5, 2.0), (3.0, 4.0)])
    assert u.components == ((0.0, 2.0), (3.0, 4.0))


def test_unsorted_input_is_sorted():
    u = IntervalUnion.from_pairs([(3.0, 4.0), (0.0, 1.0)])
    assert u.components == ((0.0, 1.0), (3.0, 4.0))


def test_touching_components_merge():
    u = IntervalUnion.from_pairs([(0.0, 1.0), (1.0, 2.0)])
    assert u.components == ((0.0, 2.0),)


def test_reversed_interval_rejected():
    with pytest.raises(InvalidArgumentError):
        IntervalUnion.single(2.0, 1.0)


def test_basic_accessors():
    u = IntervalUnion.from_pairs([(0.0, 1.0), (4.0, 5.0)])
    assert u.lo == 0.0 and u.hi == 5.0
    assert len(u) == 2 and not u.is_empty
    assert u.measure() == 2.0
    assert u.contains(0.5) and not u.contains(2.0)
    assert u.contains(1.05, pad=0.1)
    assert u.dist(2.0) == 1.0
    assert u.dist(0.5) == 0.0
    assert u.dist(6.0) == 1.0


def test_union_of_unions():
    a = IntervalUnion.single(0.0, 1.0)
    b = IntervalUnion.single(0.5, 3.0)
    assert a.union(b).components == ((0.0, 3.0),)


def test_json_round_trip():
    u = IntervalUnion.from_pairs([(0.25, 1.5), (2.0, 2.0)])
    assert IntervalUnion.from_json(u.to_json()) == u


def test_empty_set_distance_rejected():
    with pytest.raises(InvalidArgumentError):
        IntervalUnion(()).dist(0.0)
    with pytest.raises(InvalidArgumentError):
        hausdorff(IntervalUnion(()), IntervalUnion.single(0, 1))


# ---------------------------------------------------------------------------
# exact distances on hand-checked cases
# ---------------------------------------------------------------------------

def test_hausdorff_hand_case_gap_midpoint():
    # the farthest point of [0,5] from [0,1] u [4,5] is the gap midpoint 2.5
    a = IntervalUnion.from_pairs([(0.0, 1.0), (4.0, 5.0)])
    b = IntervalUnion.single(0.0, 5.0)
    assert hausdorff(a, b) == pytest.approx(1.5, abs=0.0)
    assert semi_distance(a, b) == 0.0
    assert semi_distance(b, a) == 1.5


def test_hausdorff_shifted_intervals():
    a = IntervalUnion.single(0.0, 1.0)
    b = IntervalUnion.single(0.25, 1.75)
    assert hausdorff(a, b) == pytest.approx(0.75)


def test_hausdorff_point_sets():
    a = IntervalUnion.single(0.0, 0.0)
    b = IntervalUnion.single(3.0, 3.0)
    assert hausdorff(a, b) == 3.0


# ---------------------------------------------------------------------------
# metric axioms on random unions (hypothesis)
# ---------------------------------------------------------------------------

finite = st.floats(min_value=-100.0, max_value=100.0,
                   allow_nan=False, allow_infinity=False)


@st.composite
def interval_unions(draw):
    n = draw(st.integers(min_value=1, max_value=4))
    xs = sorted(draw(st.lists(finite, min_size=2 * n, max_size=2 * n)))
    return IntervalUnion.from_pairs(
        [(xs[2 * i], xs[2 * i + 1]) for i in range(n)]
    )


@settings(max_examples=200, deadline=None)
@given(interval_unions(), interval_unions(), interval_unions())
def test_metric_axioms(a, b, c):
    dab = hausdorff(a, b)
    dba = hausdorff(b, a)
    assert dab >= 0.0
    assert dab == dba  # symmetry
    assert hausdorff(a, a) == 0.0  # identity
    if dab == 0.0:
        assert a.components == b.components  # separation (canonical form)
    # triangle inequality with a float-roundoff allowance
    assert dab <= hausdorff(a, c) + hausdorff(c, b) + 1e-9


@settings(max_examples=100, deadline=None)
@given(interval_unions(), interval_unions())
def test_semi_distance_matches_brute_force(a, b):
    # dense sampling of A can only under-estimate sup_x dist(x, B)
    xs = np.concatenate(
        [np.linspace(lo, hi, 64) for lo, hi in a.components]
    )
    brute = max(b.dist(float(x)) for x in xs)
    exact = semi_distance(a, b)
    assert exact >= brute - 1e-9
    assert exact <= brute + max(
        (hi - lo) / 63 for lo, hi in a.components
    ) + 1e-9
