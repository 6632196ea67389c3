"""Tests for the Matern-5/2 GP surrogate, with finite-difference oracles."""

import math

import numpy as np
import pytest

from gtbo.gp import GPModel, LengthscalePriors, fit, matern52, _neg_log_posterior


def _toy_data(n, D, rng, noise=0.0):
    X = rng.random((n, D))
    y = np.sin(3.0 * X[:, 0]) + 0.5 * X[:, 1] ** 2
    if noise > 0:
        y = y + noise * rng.standard_normal(n)
    return X, y


def test_kernel_at_zero_distance_equals_signal_variance():
    rng = np.random.default_rng(0)
    X = rng.random((5, 3))
    K = matern52(X, X, np.array([0.5, 1.0, 2.0]), 2.7)
    np.testing.assert_allclose(np.diag(K), 2.7, atol=1e-12)
    # symmetric and positive definite up to jitter
    np.testing.assert_allclose(K, K.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(K) > -1e-10)


def test_kernel_monotone_decreasing_in_distance():
    base = np.zeros((1, 1))
    dists = np.linspace(0.0, 5.0, 40)[:, None]
    vals = matern52(dists, base, np.array([1.0]), 1.0).ravel()
    assert np.all(np.diff(vals) < 0)


def test_interpolation_with_tiny_noise():
    rng = np.random.default_rng(1)
    X, y = _toy_data(12, 2, rng)
    gp = GPModel.from_hyperparameters(
        X, y, lengthscales=np.array([0.5, 0.5]), signal_variance=1.0,
        noise_variance=1e-12,
    )
    mean, var = gp.posterior(X)
    np.testing.assert_allclose(mean, y, atol=1e-6)
    assert np.all(var >= 0)


def test_prior_reversion_far_from_data():
    X = np.full((4, 2), 0.5)
    y = np.array([1.0, 1.1, 0.9, 1.0])
    gp = GPModel.from_hyperparameters(
        X, y, lengthscales=np.array([0.01, 0.01]), signal_variance=2.0,
        noise_variance=0.1, mean_const=3.0,
    )
    mean, var = gp.posterior(np.array([[0.95, 0.05]]))
    assert mean[0] == pytest.approx(3.0, rel=1e-3)
    assert var[0] == pytest.approx(2.0, rel=1e-3)


def test_posterior_mean_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    X, y = _toy_data(15, 3, rng)
    gp = GPModel.from_hyperparameters(
        X, y, lengthscales=np.array([0.4, 0.7, 1.2]), signal_variance=1.5,
        noise_variance=1e-4,
    )
    for _ in range(5):
        x = rng.random(3)
        mean, var, dmean, dvar = gp.posterior_with_grad(x)
        h = 1e-5
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            mp, vp = gp.posterior((x + e)[None, :])
            mm, vm = gp.posterior((x - e)[None, :])
            fd_mean = (mp[0] - mm[0]) / (2 * h)
            fd_var = (vp[0] - vm[0]) / (2 * h)
            assert dmean[i] == pytest.approx(fd_mean, rel=1e-4, abs=1e-8)
            assert dvar[i] == pytest.approx(fd_var, rel=1e-3, abs=1e-7)


def test_neg_log_posterior_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    X, y = _toy_data(10, 2, rng, noise=0.05)
    y_std = (y - y.mean()) / y.std()
    mu_ls = np.array([0.0, 0.0])
    sigma_ls = np.array([1.0, 1.0])
    theta = np.array([-0.3, 0.2, 0.1, -3.0, 0.05])
    val, grad = _neg_log_posterior(theta, X, y_std, mu_ls, sigma_ls)
    h = 1e-6
    for i in range(theta.size):
        e = np.zeros(theta.size)
        e[i] = h
        vp, _ = _neg_log_posterior(theta + e, X, y_std, mu_ls, sigma_ls)
        vm, _ = _neg_log_posterior(theta - e, X, y_std, mu_ls, sigma_ls)
        assert grad[i] == pytest.approx((vp - vm) / (2 * h), rel=1e-4, abs=1e-6)


def test_fit_predicts_heldout_smooth_function():
    rng = np.random.default_rng(4)
    X = rng.random((40, 2))
    y = np.sin(4.0 * X[:, 0]) + X[:, 1]
    gp = fit(X, y, np.array([True, True]), LengthscalePriors(), rng, n_starts=4)
    Xq = rng.random((20, 2))
    yq = np.sin(4.0 * Xq[:, 0]) + Xq[:, 1]
    mean, _ = gp.posterior(Xq)
    assert float(np.sqrt(np.mean((mean - yq) ** 2))) < 0.05


def test_fit_mutes_inactive_dimensions():
    # Data depends only on dims 0-1; dims 2-4 are inactive and get the long
    # lengthscale prior, so their fitted lengthscales should be much larger.
    rng = np.random.default_rng(5)
    X = rng.random((35, 5))
    y = np.sin(5.0 * X[:, 0]) + 2.0 * X[:, 1]
    mask = np.array([True, True, False, False, False])
    gp = fit(X, y, mask, LengthscalePriors(), rng, n_starts=4)
    ls = gp.lengthscales
    assert np.median(ls[~mask]) >= 10.0 * np.median(ls[mask])
    assert np.all(ls[~mask] >= 50.0)


def test_variance_non_increasing_when_adding_data():
    rng = np.random.default_rng(6)
    X, y = _toy_data(10, 2, rng, noise=0.01)
    hyp = dict(
        lengthscales=np.array([0.6, 0.6]), signal_variance=1.0, noise_variance=1e-4
    )
    gp_small = GPModel.from_hyperparameters(X[:-1], y[:-1], **hyp)
    gp_full = GPModel.from_hyperparameters(X, y, **hyp)
    Xq = rng.random((30, 2))
    _, var_small = gp_small.posterior(Xq)
    _, var_full = gp_full.posterior(Xq)
    assert np.all(var_full <= var_small + 1e-8)


def test_standardization_round_trip():
    # Shifting and scaling the targets shifts and scales the predictions.
    rng = np.random.default_rng(7)
    X, y = _toy_data(25, 2, rng, noise=0.01)
    gp_a = fit(X, y, np.array([True, True]), LengthscalePriors(), rng=np.random.default_rng(8))
    gp_b = fit(
        X, 100.0 + 5.0 * y, np.array([True, True]), LengthscalePriors(),
        rng=np.random.default_rng(8),
    )
    Xq = rng.random((10, 2))
    mean_a, var_a = gp_a.posterior(Xq)
    mean_b, var_b = gp_b.posterior(Xq)
    np.testing.assert_allclose(mean_b, 100.0 + 5.0 * mean_a, rtol=1e-2, atol=5e-2)
    np.testing.assert_allclose(var_b, 25.0 * var_a, rtol=0.1, atol=1e-3)


def test_fit_requires_two_points():
    rng = np.random.default_rng(9)
    with pytest.raises(ValueError):
        fit(np.zeros((1, 2)), np.zeros(1), np.array([True, True]), LengthscalePriors(), rng)


def test_constant_targets_do_not_crash():
    rng = np.random.default_rng(10)
    X = rng.random((8, 2))
    gp = fit(X, np.full(8, 2.5), np.array([True, True]), LengthscalePriors(), rng, n_starts=2)
    mean, _ = gp.posterior(X)
    np.testing.assert_allclose(mean, 2.5, atol=1e-3)


def test_warm_start_accepted():
    rng = np.random.default_rng(11)
    X, y = _toy_data(15, 2, rng, noise=0.05)
    mask = np.array([True, True])
    gp1 = fit(X, y, mask, LengthscalePriors(), rng, n_starts=4)
    gp2 = fit(X, y, mask, LengthscalePriors(), rng, n_starts=1, warm_start=gp1.theta)
    assert gp2.nll <= gp1.nll + 1e-6
