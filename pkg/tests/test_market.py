import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quenched_portfolio import (
    Distribution,
    InvalidParameterError,
    MarketParams,
    MarketSample,
    SingularWishartError,
    sample_market,
    wishart_apply_inverse,
)
from quenched_portfolio.harness import solve_dense

from conftest import identity_sample


def test_same_seed_same_index_is_identical():
    params = MarketParams(20, 40, master_seed=7)
    s1, s2 = sample_market(params, 0), sample_market(params, 0)
    assert np.array_equal(s1.x_scaled, s2.x_scaled)
    assert np.array_equal(s1.means, s2.means)


def test_samples_do_not_depend_on_generation_order():
    params = MarketParams(10, 30, master_seed=99)
    forward = [sample_market(params, c) for c in range(5)]
    backward = [sample_market(params, c) for c in reversed(range(5))][::-1]
    for f, b in zip(forward, backward):
        assert np.array_equal(f.x_scaled, b.x_scaled)
        assert np.array_equal(f.means, b.means)
    assert not np.array_equal(forward[0].means, forward[1].means)


def test_different_master_seeds_differ():
    a = sample_market(MarketParams(10, 30, master_seed=1), 0)
    b = sample_market(MarketParams(10, 30, master_seed=2), 0)
    assert not np.array_equal(a.x_scaled, b.x_scaled)


@pytest.mark.parametrize("dist", list(Distribution))
def test_return_moments(dist):
    n, p = 250, 750
    s = sample_market(MarketParams(n, p, return_dist=dist, master_seed=3), 0)
    x = s.x_scaled * np.sqrt(n)
    se_mean = np.sqrt(1.0 / (n * p))
    se_var = np.sqrt(2.0 / (n * p))
    assert abs(x.mean()) < 5 * se_mean
    assert abs(x.var() - 1.0) < 0.05
    assert abs(x.var() - 1.0) < 5 * se_var  # uniform kurtosis is lower, so this bound still holds
    assert s.x_scaled.shape == (n, p)


@pytest.mark.parametrize("dist", list(Distribution))
def test_mean_vector_moments(dist):
    s = sample_market(MarketParams(250, 750, mean_dist=dist, master_seed=4), 0)
    assert abs(s.means.mean() - 1.0) < 0.316


def test_uniform_support_matches_variance():
    s = sample_market(
        MarketParams(50, 100, return_variance=4.0, return_dist="uniform", master_seed=5), 0
    )
    x = s.x_scaled * np.sqrt(50)
    assert np.max(np.abs(x)) <= np.sqrt(3.0) * 2.0


def test_moment_fidelity_over_many_samples():
    n, p, C = 250, 750, 100
    params = MarketParams(n, p, return_variance=1.0, mean_of_means=1.0,
                          variance_of_means=1.0, master_seed=11)
    x_means, x_vars, r_means, r_vars = [], [], [], []
    for c in range(C):
        s = sample_market(params, c)
        x = s.x_scaled * np.sqrt(n)
        x_means.append(x.mean())
        x_vars.append(x.var())
        r_means.append(s.means.mean())
        r_vars.append(s.means.var(ddof=1))
    total = C * n * p
    assert abs(np.mean(x_means)) < 5 / np.sqrt(total)
    assert abs(np.mean(x_vars) - 1.0) < 5 * np.sqrt(2.0 / total)
    assert abs(np.mean(r_means) - 1.0) < 5 / np.sqrt(C * n)
    assert abs(np.mean(r_vars) - 1.0) < 5 * np.sqrt(2.0 / (C * n))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_assets=10, n_scenarios=10),
        dict(n_assets=10, n_scenarios=5),
        dict(n_assets=10, n_scenarios=20, return_variance=0.0),
        dict(n_assets=10, n_scenarios=20, variance_of_means=-1.0),
        dict(n_assets=0, n_scenarios=20),
        dict(n_assets=10, n_scenarios=20, master_seed=-1),
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(InvalidParameterError):
        MarketParams(**kwargs)


def test_sample_is_read_only():
    s = sample_market(MarketParams(4, 8), 0)
    with pytest.raises(ValueError):
        s.x_scaled[0, 0] = 1.0
    with pytest.raises(ValueError):
        s.means[0] = 1.0


def test_identity_wishart_inverse_is_identity():
    s = identity_sample([0.0, 1.0, 3.0])
    (y,) = wishart_apply_inverse(s, [np.ones(3)])
    assert np.array_equal(y, np.ones(3))


def test_inverse_matches_elimination_oracle():
    s = sample_market(MarketParams(4, 8, master_seed=17), 0)
    e = np.ones(4)
    (y,) = wishart_apply_inverse(s, [e])
    y_ref = solve_dense(s.x_scaled @ s.x_scaled.T, e)
    assert np.max(np.abs(y - y_ref)) <= 1e-10


def test_several_right_hand_sides_share_one_factorization():
    s = sample_market(MarketParams(30, 60, master_seed=1), 0)
    rng = np.random.default_rng(0)
    vs = [rng.normal(size=30) for _ in range(4)]
    ys = wishart_apply_inverse(s, vs)
    J = s.wishart
    for v, y in zip(vs, ys):
        assert np.linalg.norm(J @ y - v) <= 1e-10 * np.linalg.norm(v)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 30),
    extra=st.integers(1, 40),
    seed=st.integers(0, 2**32),
    dist=st.sampled_from(list(Distribution)),
)
def test_solve_residual_property(n, extra, seed, dist):
    s = sample_market(MarketParams(n, n + extra, return_dist=dist, master_seed=seed), 0)
    v = np.linspace(-1.0, 2.0, n)
    (y,) = wishart_apply_inverse(s, [v])
    assert np.linalg.norm(s.wishart @ y - v) <= 1e-10 * np.linalg.norm(v)


def test_wishart_diagonal_mean_at_desk_scale():
    n = 250
    params = MarketParams(n, 750, master_seed=21)
    a = np.mean([
        wishart_apply_inverse(sample_market(params, c), [np.ones(n)])[0].sum() / n
        for c in range(20)
    ])
    assert a == pytest.approx(0.5, rel=0.02)


def test_duplicated_asset_is_singular():
    x = np.random.default_rng(0).normal(size=(3, 10))
    x[2] = x[1]
    s = MarketSample(x, np.array([1.0, 2.0, 3.0]))
    with pytest.raises(SingularWishartError, match="singular Wishart matrix"):
        wishart_apply_inverse(s, [np.ones(3)])


def test_rank_deficient_matrix_is_singular():
    s = MarketSample(np.eye(3, 4)[:, [0, 1, 1, 1]], np.arange(3.0))
    with pytest.raises(SingularWishartError):
        wishart_apply_inverse(s, [np.ones(3)])


def test_shape_mismatch_rejected():
    with pytest.raises(InvalidParameterError):
        MarketSample(np.ones((3, 5)), np.ones(4))
    s = sample_market(MarketParams(3, 6), 0)
    with pytest.raises(InvalidParameterError):
        wishart_apply_inverse(s, [np.ones(4)])
