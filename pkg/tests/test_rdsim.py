import numpy as np
import pytest

from bnews import rdsim
from bnews.errors import DivergenceError, InvalidArgumentError
from bnews.rdsim import NoiseModel, TimeSeries, additive_random_map


@pytest.fixture
def half_slope_map():
    noise = NoiseModel.uniform(-0.5, 0.5)
    rmap = additive_random_map(lambda x: 0.5 * np.asarray(x), noise,
                               affine=(0.5, 0.0))
    return rmap, noise


# ---------------------------------------------------------------------------
# noise models and series containers
# ---------------------------------------------------------------------------

def test_noise_model_validation():
    with pytest.raises(InvalidArgumentError):
        NoiseModel.uniform(1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        NoiseModel.scaled_uniform(0.0)
    assert NoiseModel.uniform(-1.0, 3.0).mean == 1.0
    assert NoiseModel.scaled_uniform(2.0).support == (0.0, 2.0)


def test_time_series_validation():
    with pytest.raises(InvalidArgumentError):
        TimeSeries(np.array([]))
    with pytest.raises(InvalidArgumentError):
        TimeSeries(np.array([1.0, np.nan]))
    with pytest.raises(InvalidArgumentError):
        TimeSeries(np.zeros((2, 2)))


def test_split_seeds_deterministic_and_distinct():
    a = rdsim.split_seeds(7, 16)
    b = rdsim.split_seeds(7, 16)
    assert a == b
    assert len(set(a)) == 16
    assert rdsim.split_seeds(8, 16) != a


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def test_simulate_bit_reproducible(half_slope_map):
    rmap, noise = half_slope_map
    s1 = rdsim.simulate(rmap, noise, 0.0, 5000, seed=3)
    s2 = rdsim.simulate(rmap, noise, 0.0, 5000, seed=3)
    s3 = rdsim.simulate(rmap, noise, 0.0, 5000, seed=4)
    assert np.array_equal(s1.samples, s2.samples)
    assert not np.array_equal(s1.samples, s3.samples)
    assert s1.meta["prng"] == rdsim.PRNG_ID


def test_affine_fast_path_matches_generic_loop():
    noise = NoiseModel.uniform(-0.5, 0.5)
    fast = additive_random_map(lambda x: 0.6 * x + 0.2, noise,
                               affine=(0.6, 0.2))
    slow = additive_random_map(lambda x: 0.6 * x + 0.2, noise)
    a = rdsim.simulate(fast, noise, 1.0, 2000, burn_in=10, seed=5)
    b = rdsim.simulate(slow, noise, 1.0, 2000, burn_in=10, seed=5)
    np.testing.assert_allclose(a.samples, b.samples, rtol=0, atol=1e-9)


def test_samples_stay_in_invariant_interval(half_slope_map):
    # for x -> x/2 + xi with |xi| <= 1/2 the interval [-1, 1] is invariant
    rmap, noise = half_slope_map
    s = rdsim.simulate(rmap, noise, 0.0, 100_000, seed=1)
    assert np.all(np.abs(s.samples) <= 1.0)


def test_guard_escape_index():
    # x -> x + 1 + xi with |xi| <= 0.1 escapes [-10, 10] after ~10 steps
    noise = NoiseModel.uniform(-0.1, 0.1)
    rmap = additive_random_map(lambda x: x + 1.0, noise, affine=(1.0, 1.0))
    with pytest.raises(DivergenceError) as err:
        rdsim.simulate(rmap, noise, 0.0, 100, burn_in=0, seed=0,
                       guard=(-10.0, 10.0))
    assert 9 <= err.value.escape_index <= 12


def test_simulate_argument_validation(half_slope_map):
    rmap, noise = half_slope_map
    with pytest.raises(InvalidArgumentError):
        rdsim.simulate(rmap, noise, 0.0, 0)
    with pytest.raises(InvalidArgumentError):
        rdsim.simulate(rmap, noise, 0.0, 10, burn_in=-1)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def test_empirical_support_and_occupancy(half_slope_map):
    rmap, noise = half_slope_map
    s = rdsim.simulate(rmap, noise, 0.0, 200_000, seed=9)
    lo, hi = rdsim.empirical_support(s)
    assert -1.0 <= lo < hi <= 1.0
    count, frac = rdsim.occupancy(s, (lo, hi))
    assert count == len(s) and frac == 1.0
    count, frac = rdsim.occupancy(s, (hi, lo))
    assert count == 0 and frac == 0.0
    # the stationary law is symmetric, so each half carries about half
    _, frac_left = rdsim.occupancy(s, (-1.0, 0.0))
    assert abs(frac_left - 0.5) < 0.01
    with pytest.raises(InvalidArgumentError):
        rdsim.occupancy(s, (np.inf, 0.0))


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def test_csv_round_trip(tmp_path, half_slope_map):
    rmap, noise = half_slope_map
    s = rdsim.simulate(rmap, noise, 0.0, 500, seed=2)
    path = tmp_path / "series.csv"
    rdsim.write_csv(path, s)
    back = rdsim.read_csv(path)
    assert np.array_equal(back.samples, s.samples)  # repr() is lossless
    assert back.meta["map"] == s.meta["map"]
    assert back.meta["seed"] == str(s.meta["seed"])


def test_bnts_round_trip(tmp_path):
    path = tmp_path / "data.bnts"
    data = np.linspace(-1.0, 1.0, 777)
    rdsim.write_bnts(path, data)
    assert np.array_equal(rdsim.read_bnts(path), data)


def test_bnts_two_channels(tmp_path):
    path = tmp_path / "data.bnts"
    data = np.arange(12.0).reshape(6, 2)
    rdsim.write_bnts(path, data, channels=2)
    assert np.array_equal(rdsim.read_bnts(path), data)


def test_bnts_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.bnts"
    path.write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(InvalidArgumentError):
        rdsim.read_bnts(path)
