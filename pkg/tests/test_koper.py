import numpy as np
import pytest

from bnews import koper as kp
from bnews.errors import (
    DivergenceError,
    InvalidArgumentError,
    NoReturnError,
)

SEC = kp.SectionSpec()


# ---------------------------------------------------------------------------
# configuration and basic model structure
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        kp.KoperConfig(dt=0.0)
    with pytest.raises(InvalidArgumentError):
        kp.KoperConfig(dt=0.1, noise_dt=0.01)
    with pytest.raises(InvalidArgumentError):
        kp.KoperConfig(noise_mode="sometimes")
    with pytest.raises(InvalidArgumentError):
        kp.KoperConfig(eps=-0.1)
    with pytest.raises(InvalidArgumentError):
        kp.KoperConfig(sigma=-0.1)
    with pytest.raises(InvalidArgumentError):
        kp.KoperConfig(lam=0.0)  # outside the studied window


def test_vector_field_hand_values():
    cfg = kp.KoperConfig(lam=-7.0)
    x, y, z = 0.5, -1.0, -8.0
    fx, fy, fz = kp.vector_field((x, y, z), cfg)
    assert fx == pytest.approx(y - x**3 + 3 * x)
    assert fy == pytest.approx(cfg.eps * (cfg.k * x - 2 * (y + cfg.lam) + z))
    assert fz == pytest.approx(cfg.eps * (cfg.lam + y - z))


def test_koper_step_deterministic_euler():
    cfg = kp.KoperConfig(lam=-7.0)
    state = np.array([0.5, -1.0, -8.0])
    new = kp.koper_step(state, cfg)
    np.testing.assert_allclose(
        new, state + kp.vector_field(state, cfg) * cfg.dt
    )


def test_koper_step_noise_validation():
    cfg = kp.KoperConfig(lam=-7.0, sigma=0.1)
    with pytest.raises(InvalidArgumentError):
        kp.koper_step((0.0, 0.0, -8.0), cfg, noise_increment=(2.0, 0.0, 0.0))
    with pytest.raises(InvalidArgumentError):
        kp.koper_step((np.inf, 0.0, -8.0), cfg)


def test_noise_matrix_scaling():
    cfg = kp.KoperConfig(lam=-7.0, sigma=0.25)
    np.testing.assert_allclose(cfg.noise_matrix,
                               0.25 * np.asarray(kp.NOISE_MIX))
    # a bounded kick is confined to the zonotope A * [-1,1]^3
    rng = np.random.default_rng(0)
    row_sums = np.abs(cfg.noise_matrix).sum(axis=1)
    for _ in range(100):
        kick = cfg.noise_matrix @ rng.uniform(-1, 1, 3)
        assert np.all(np.abs(kick) <= row_sums + 1e-12)


def test_critical_manifold_and_folds():
    # fold lines sit at x = +-1 on the cubic manifold y = x^3 - 3x
    assert kp.critical_manifold_y(1.0) == -2.0
    assert kp.critical_manifold_y(-1.0) == 2.0
    xs = np.linspace(-2, 2, 101)
    slopes = 3 * xs**2 - 3
    assert slopes[np.argmin(np.abs(xs - 1.0))] == pytest.approx(0.0)


def test_folded_singularities_values():
    lam = -7.0
    q_plus, q_minus = kp.folded_singularities(lam)
    np.testing.assert_allclose(q_plus, [1.0, 2.0, 2 * lam + 6])
    np.testing.assert_allclose(q_minus, [-1.0, -2.0, 2 * lam - 6])


# ---------------------------------------------------------------------------
# return map
# ---------------------------------------------------------------------------

def test_return_sample_deterministic_and_seed_free():
    cfg = kp.KoperConfig(lam=-6.9, sigma=0.0)
    s1 = kp.return_map_sample(-8.0, cfg, SEC)
    s2 = kp.return_map_sample(-8.0, cfg, SEC, seed=12345)
    assert s1.z_out == s2.z_out  # sigma = 0 ignores the seed
    assert s1.crossing_time == s2.crossing_time
    assert SEC.z_range[0] - 3 < s1.z_out < SEC.z_range[1] + 3
    assert not s1.early_return_flag


def test_return_sample_noise_reproducible():
    cfg = kp.KoperConfig(lam=-6.9, sigma=0.01)
    a = kp.return_map_sample(-8.0, cfg, SEC, seed=7)
    b = kp.return_map_sample(-8.0, cfg, SEC, seed=7)
    c = kp.return_map_sample(-8.0, cfg, SEC, seed=8)
    assert a.z_out == b.z_out
    assert a.z_out != c.z_out


def test_return_sample_input_validation():
    cfg = kp.KoperConfig(lam=-6.9)
    with pytest.raises(InvalidArgumentError):
        kp.return_map_sample(0.0, cfg, SEC)  # outside z_range


def test_return_sample_step_budget():
    cfg = kp.KoperConfig(lam=-6.9)
    with pytest.raises(NoReturnError):
        kp.return_map_sample(-8.0, cfg, SEC, max_steps=100)


def test_deterministic_return_map_monotone_near_fixed_point():
    cfg = kp.KoperConfig(lam=-6.88, sigma=0.0)
    zs = np.linspace(-8.1, -7.9, 5)
    out = kp.deterministic_return_map(cfg, SEC, zs)
    assert out.shape == (5,)
    assert np.all(np.isfinite(out))
    assert np.all(np.diff(out) > 0)  # order-preserving on this range


def test_stochastic_cloud_envelope():
    cfg = kp.KoperConfig(lam=-6.9, sigma=0.01, seed=3)
    cloud = kp.stochastic_return_cloud(cfg, SEC, [-8.1, -8.0], n_per_z=5)
    zs, lo, hi = cloud.min_max_by_z()
    assert list(zs) == [-8.1, -8.0]
    assert np.all(lo <= hi)
    assert cloud.errors == []


def test_return_orbit_reproducible():
    cfg = kp.KoperConfig(lam=-6.9, sigma=0.01, seed=11)
    z1, e1 = kp.return_orbit(cfg, SEC, -8.0, 10)
    z2, e2 = kp.return_orbit(cfg, SEC, -8.0, 10)
    assert np.array_equal(z1, z2)
    assert np.array_equal(e1, e2)
    assert z1.shape == (10,) and e1.dtype == bool


# ---------------------------------------------------------------------------
# deterministic fixed point and derivative
# ---------------------------------------------------------------------------

def test_deterministic_fixed_point_requires_zero_noise():
    cfg = kp.KoperConfig(lam=-6.88, sigma=0.01)
    with pytest.raises(InvalidArgumentError):
        kp.deterministic_derivative_at_fixed_point(cfg, SEC)


def test_deterministic_fixed_point_location_and_slope():
    cfg = kp.KoperConfig(lam=-6.88, sigma=0.0)
    z_star, slope = kp.deterministic_derivative_at_fixed_point(cfg, SEC)
    # the fixed point is where the return map crosses the identity
    p = kp.return_map_sample(z_star, cfg, SEC).z_out
    assert p == pytest.approx(z_star, abs=1e-6)
    assert 0.0 < slope < 1.0  # attracting before the tangency


def test_deterministic_frozen_continuation():
    cfg = kp.KoperConfig(lam=-6.88, sigma=0.0)
    z_star, slope = kp.deterministic_derivative_at_fixed_point(
        cfg, SEC, frozen_z=-8.0
    )
    assert z_star == -8.0
    assert np.isfinite(slope)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_invariant_set_sweep_thread_invariance():
    cfg = kp.KoperConfig(sigma=0.01, seed=3)
    grid = [-6.9, -6.88]
    one = kp.invariant_set_sweep(cfg, SEC, grid, orbit_length=60,
                                 burn_returns=20, threads=1)
    many = kp.invariant_set_sweep(cfg, SEC, grid, orbit_length=60,
                                  burn_returns=20, threads=4)
    assert one.errors == [None, None]
    assert [s.components for s in one.sets] == \
        [s.components for s in many.sets]
    assert one.hausdorff_steps == many.hausdorff_steps


def test_boundary_derivative_rows_report_missing_support():
    cfg = kp.KoperConfig(sigma=0.01, seed=3)
    rows = kp.boundary_derivative_sweep(cfg, SEC, [-6.9], n_real=5,
                                        supports={})
    assert rows[0].error is not None
    assert np.isnan(rows[0].d_lambda)
