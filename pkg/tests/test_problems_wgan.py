"""Toy Gaussian generator vs MLP critic: oracle consistency at desk scale."""
import numpy as np
import pytest

from gdakit.core import DimensionError, ParameterError, RngStream
from gdakit.problems import JointPoint, check_oracle, make_gaussian_wgan


def _small_wgan(**kw):
    kw.setdefault("disc_arch", (2, 8, 1))
    kw.setdefault("quad_nodes", 80)
    return make_gaussian_wgan(**kw)


def test_defaults_match_shipped_configuration():
    prob = make_gaussian_wgan()
    assert prob.batch == 100
    assert np.array_equal(prob.mu_star, [0.5, -1.5])
    assert np.array_equal(prob.sigma_star, [0.1, 0.3])
    assert prob.m == 4  # generator is (mu_1, mu_2, sigma_1, sigma_2)


def test_dist_to_opt_zero_at_true_generator():
    prob = _small_wgan()
    theta_star = np.concatenate([prob.mu_star, prob.sigma_star])
    w = prob.default_init().y
    assert prob.dist_to_opt(JointPoint(theta_star, w)) == 0.0


def test_stoch_grad_deterministic_given_seed():
    prob = _small_wgan()
    pt = prob.default_init()
    a = prob.stoch_grad(pt, RngStream(6, stream_id=0))
    b = prob.stoch_grad(pt, RngStream(6, stream_id=0))
    assert np.array_equal(a.gx, b.gx) and np.array_equal(a.gy, b.gy)


def test_critic_gradient_unbiased_at_true_generator():
    # when generated and data distributions coincide the two halves of the
    # critic gradient cancel in expectation, for any fixed critic
    prob = _small_wgan(batch=50)
    theta_star = np.concatenate([prob.mu_star, prob.sigma_star])
    w = prob.default_init().y
    pt = JointPoint(theta_star, w)

    exact = prob.exact_grad(pt)
    assert np.linalg.norm(exact.gy) < 1e-9  # quadrature sees identical nodes

    rng = RngStream(8, stream_id=0)
    n = 10**4
    s1 = np.zeros(prob.n)
    s2 = np.zeros(prob.n)
    for _ in range(n):
        gy = prob.stoch_grad(pt, rng).gy
        s1 += gy
        s2 += gy * gy
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0)
    se_agg = np.sqrt(var.sum() / n)
    assert np.linalg.norm(mean) <= 3 * se_agg


def test_minibatch_mean_matches_quadrature_gradient():
    prob = _small_wgan(batch=40)
    rng = RngStream(9, stream_id=0)
    pt = prob.random_point(rng, 1.0)
    exact = prob.exact_grad(pt)
    exact_flat = np.concatenate([exact.gx, exact.gy])
    n = 3000
    s1 = np.zeros(exact_flat.size)
    s2 = np.zeros(exact_flat.size)
    for _ in range(n):
        g = prob.stoch_grad(pt, rng)
        flat = np.concatenate([g.gx, g.gy])
        s1 += flat
        s2 += flat * flat
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0)
    se_agg = np.sqrt(var.sum() / n)
    assert np.linalg.norm(mean - exact_flat) <= 4 * se_agg


def test_check_oracle_passes():
    # shipped configuration (the small-arch variant above trades quadrature
    # accuracy for speed and only suits statistical checks)
    prob = make_gaussian_wgan(batch=25)
    check_oracle(
        prob, 2000, RngStream(10, stream_id=5), points=4, fd_coords=6, fd_step=1e-5
    )


def test_quadrature_nodes_validated():
    with pytest.raises(ParameterError):
        make_gaussian_wgan(quad_nodes=5)
    with pytest.raises(ParameterError):
        make_gaussian_wgan(quad_nodes=400)


def test_constructor_validation():
    with pytest.raises(ParameterError):
        make_gaussian_wgan(sigma_star=(0.1, 0.0))
    with pytest.raises(DimensionError):
        make_gaussian_wgan(disc_arch=(3, 8, 1))
    with pytest.raises(ParameterError):
        make_gaussian_wgan(batch=0)


def test_default_init_seed_override():
    prob = _small_wgan()
    a = prob.default_init()
    b = prob.default_init()
    assert np.array_equal(a.y, b.y)
    c = prob.default_init(seed=123)
    assert not np.array_equal(a.y, c.y)
    assert np.array_equal(a.x, np.array([0.0, 0.0, 1.0, 1.0]))


def test_probe_points_stay_in_quadrature_regime():
    # fan-in scaling keeps critic preactivations on the scale the fixed
    # node grid resolves; the shipped grid must then agree with the densest
    # supported grid at probe points (the documented capability bound)
    coarse = make_gaussian_wgan()
    fine = make_gaussian_wgan(quad_nodes=300)
    rng = RngStream(11, stream_id=0)
    for _ in range(5):
        pt = coarse.random_point(rng, 1.0)
        ga = coarse.exact_grad(pt)
        gb = fine.exact_grad(pt)
        num = np.linalg.norm(np.concatenate([ga.gx - gb.gx, ga.gy - gb.gy]))
        den = max(np.linalg.norm(np.concatenate([gb.gx, gb.gy])), 1e-8)
        assert num / den < 1e-3
