"""Gaussian-process surrogate with a Matern-5/2 ARD kernel.

Hyperparameters are fitted by MAP over the marginal likelihood with
log-normal priors: short lengthscales for dimensions flagged active by the
group-testing phase, extremely long lengthscales for the rest, which
effectively mutes the inactive dimensions without dropping them from the
model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

__all__ = ["LengthscalePriors", "GPModel", "matern52", "fit"]

_SQRT5 = math.sqrt(5.0)
_LOG_2PI = math.log(2.0 * math.pi)

# Noise / signal variance hyperpriors (on the log of the variance).
_LOG_SF2_PRIOR = (0.0, 1.0)
_LOG_SN2_PRIOR = (-4.0, 1.0)

_JITTERS = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4)

_BOUNDS_LOG_LS = (-5.0, 12.0)
_BOUNDS_LOG_SF2 = (-8.0, 8.0)
_BOUNDS_LOG_SN2 = (-23.0, 4.0)
_BOUNDS_MEAN = (-10.0, 10.0)


@dataclass(frozen=True)
class LengthscalePriors:
    """Log-normal lengthscale priors, applied per dimension via the active mask."""

    active_mu: float = 0.0
    active_sigma: float = 1.0
    inactive_mu: float = 7.0
    inactive_sigma: float = 1.0

    def mu_vector(self, active_mask: np.ndarray) -> np.ndarray:
        return np.where(active_mask, self.active_mu, self.inactive_mu)

    def sigma_vector(self, active_mask: np.ndarray) -> np.ndarray:
        return np.where(active_mask, self.active_sigma, self.inactive_sigma)


def matern52(
    X1: np.ndarray, X2: np.ndarray, lengthscales: np.ndarray, signal_variance: float
) -> np.ndarray:
    """Matern-5/2 ARD kernel matrix."""
    r = cdist(X1 / lengthscales, X2 / lengthscales)
    s = _SQRT5 * r
    return signal_variance * (1.0 + s + s * s / 3.0) * np.exp(-s)


def _scaled_dist(X: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    return cdist(X / lengthscales, X / lengthscales)


class GPModel:
    """Fitted GP; immutable after construction, safe for concurrent queries.

    Internally works on standardized targets; public predictions and
    hyperparameter properties are reported in original units.
    """

    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        log_ls: np.ndarray,
        log_sf2: float,
        log_sn2: float,
        mean_const: float,
        active_mask: np.ndarray,
        y_mean: float,
        y_scale: float,
        nll: float = np.nan,
    ):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.log_ls = np.asarray(log_ls, dtype=float)
        self.log_sf2 = float(log_sf2)
        self.log_sn2 = float(log_sn2)
        self.mean_const = float(mean_const)
        self.active_mask = np.asarray(active_mask, dtype=bool)
        self.y_mean = float(y_mean)
        self.y_scale = float(y_scale)
        self.nll = float(nll)

        ls = np.exp(self.log_ls)
        sf2 = math.exp(self.log_sf2)
        sn2 = math.exp(self.log_sn2)
        K = matern52(self.X, self.X, ls, sf2) + sn2 * np.eye(len(self.X))
        self._cho, jitter = _robust_cholesky(K)
        self._y_std = (self.y - self.y_mean) / self.y_scale
        self._alpha = cho_solve(self._cho, self._y_std - self.mean_const)

    @classmethod
    def from_hyperparameters(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        lengthscales: np.ndarray,
        signal_variance: float,
        noise_variance: float,
        mean_const: float = 0.0,
        active_mask: np.ndarray | None = None,
    ) -> "GPModel":
        """Build a model with fixed hyperparameters in original data units."""
        X = np.asarray(X, dtype=float)
        if active_mask is None:
            active_mask = np.ones(X.shape[1], dtype=bool)
        return cls(
            X,
            y,
            np.log(np.asarray(lengthscales, dtype=float)),
            math.log(signal_variance),
            math.log(noise_variance),
            mean_const,
            active_mask,
            y_mean=0.0,
            y_scale=1.0,
        )

    # -- reported hyperparameters (original units) -------------------------

    @property
    def theta(self) -> np.ndarray:
        """Packed log-hyperparameter vector, usable as a warm start."""
        return np.concatenate([self.log_ls, [self.log_sf2, self.log_sn2, self.mean_const]])

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_ls)

    @property
    def signal_variance(self) -> float:
        return math.exp(self.log_sf2) * self.y_scale**2

    @property
    def noise_variance(self) -> float:
        return math.exp(self.log_sn2) * self.y_scale**2

    @property
    def mean_constant(self) -> float:
        return self.y_mean + self.mean_const * self.y_scale

    # -- prediction --------------------------------------------------------

    def posterior(self, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Predictive mean and latent variance at query points (original units)."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        k = matern52(Xq, self.X, self.lengthscales, math.exp(self.log_sf2))
        mean_std = self.mean_const + k @ self._alpha
        v = cho_solve(self._cho, k.T)
        var_std = math.exp(self.log_sf2) - np.sum(k * v.T, axis=1)
        var_std = np.maximum(var_std, 0.0)
        return self.y_mean + self.y_scale * mean_std, self.y_scale**2 * var_std

    def posterior_with_grad(
        self, x: np.ndarray
    ) -> tuple[float, float, np.ndarray, np.ndarray]:
        """Mean, variance, and their gradients w.r.t. one query point."""
        x = np.asarray(x, dtype=float)
        ls = self.lengthscales
        sf2 = math.exp(self.log_sf2)
        diff = x[None, :] - self.X  # (n, D)
        r = np.sqrt(np.sum((diff / ls) ** 2, axis=1))
        s = _SQRT5 * r
        k = sf2 * (1.0 + s + s * s / 3.0) * np.exp(-s)
        # dk_j/dx = -(5/3) sf2 (1 + s_j) exp(-s_j) * diff_j / ls^2
        coeff = -(5.0 / 3.0) * sf2 * (1.0 + s) * np.exp(-s)
        J = coeff[:, None] * diff / ls[None, :] ** 2  # (n, D)
        v = cho_solve(self._cho, k)
        mean_std = self.mean_const + k @ self._alpha
        var_std = max(sf2 - float(k @ v), 0.0)
        dmean_std = J.T @ self._alpha
        dvar_std = -2.0 * (J.T @ v)
        return (
            self.y_mean + self.y_scale * float(mean_std),
            self.y_scale**2 * var_std,
            self.y_scale * dmean_std,
            self.y_scale**2 * dvar_std,
        )


def _robust_cholesky(K: np.ndarray):
    """Cholesky with escalating diagonal jitter."""
    n = len(K)
    for jitter in (0.0,) + _JITTERS:
        try:
            return cho_factor(K + jitter * np.eye(n), lower=True), jitter
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("kernel matrix not positive definite at any jitter level")


def _neg_log_posterior(theta, X, y_std, mu_ls, sigma_ls):
    """Negative (log marginal likelihood + log hyperpriors) and its gradient."""
    n, D = X.shape
    log_ls = theta[:D]
    log_sf2, log_sn2, mean = theta[D], theta[D + 1], theta[D + 2]
    ls = np.exp(log_ls)
    sf2 = math.exp(log_sf2)
    sn2 = math.exp(log_sn2)

    r_dist = _scaled_dist(X, ls)
    s = _SQRT5 * r_dist
    E = np.exp(-s)
    Kf = sf2 * (1.0 + s + s * s / 3.0) * E
    K = Kf + (sn2 + 1e-10) * np.eye(n)
    try:
        cho = cho_factor(K, lower=True)
    except np.linalg.LinAlgError:
        return 1e12, np.zeros_like(theta)
    resid = y_std - mean
    alpha = cho_solve(cho, resid)
    logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
    nll = 0.5 * float(resid @ alpha) + 0.5 * logdet + 0.5 * n * _LOG_2PI

    Kinv = cho_solve(cho, np.eye(n))
    W = np.outer(alpha, alpha) - Kinv

    # d/d log ls_i: A = W * (5/3) sf2 (1 + s) E, summed against squared coord diffs.
    A = W * ((5.0 / 3.0) * sf2 * (1.0 + s) * E)
    srow = A.sum(axis=1)
    term1 = srow @ (X * X)
    term2 = np.sum((A @ X) * X, axis=0)
    grad_ls = (term1 - term2) / ls**2
    grad_sf2 = 0.5 * float(np.sum(W * Kf))
    grad_sn2 = 0.5 * sn2 * float(np.trace(W))
    grad_mean = float(np.sum(alpha))
    grad_lml = np.concatenate([grad_ls, [grad_sf2, grad_sn2, grad_mean]])

    # Gaussian hyperpriors in log space (flat prior on the mean).
    lp = -0.5 * np.sum(((log_ls - mu_ls) / sigma_ls) ** 2)
    lp += -0.5 * ((log_sf2 - _LOG_SF2_PRIOR[0]) / _LOG_SF2_PRIOR[1]) ** 2
    lp += -0.5 * ((log_sn2 - _LOG_SN2_PRIOR[0]) / _LOG_SN2_PRIOR[1]) ** 2
    grad_prior = np.concatenate(
        [
            -(log_ls - mu_ls) / sigma_ls**2,
            [
                -(log_sf2 - _LOG_SF2_PRIOR[0]) / _LOG_SF2_PRIOR[1] ** 2,
                -(log_sn2 - _LOG_SN2_PRIOR[0]) / _LOG_SN2_PRIOR[1] ** 2,
                0.0,
            ],
        ]
    )
    return nll - lp, -(grad_lml + grad_prior)


def fit(
    X: np.ndarray,
    y: np.ndarray,
    active_mask: np.ndarray,
    priors: LengthscalePriors,
    rng: np.random.Generator,
    n_starts: int = 8,
    warm_start: np.ndarray | None = None,
    max_iter: int = 80,
) -> GPModel:
    """MAP fit by multi-start L-BFGS in log-hyperparameter space.

    One start sits at the prior medians, the rest are random perturbations;
    a warm_start vector (e.g. the previous iteration's solution) is used as
    an additional start.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) < 2:
        raise ValueError("need at least 2 training points")
    n, D = X.shape
    active_mask = np.asarray(active_mask, dtype=bool)
    y_mean = float(np.mean(y))
    y_scale = float(np.std(y))
    if y_scale < 1e-12:
        y_scale = 1.0
    y_std = (y - y_mean) / y_scale

    mu_ls = priors.mu_vector(active_mask)
    sigma_ls = priors.sigma_vector(active_mask)
    base = np.concatenate([mu_ls, [_LOG_SF2_PRIOR[0], _LOG_SN2_PRIOR[0], 0.0]])
    starts = [base]
    if warm_start is not None:
        starts.append(np.asarray(warm_start, dtype=float))
    while len(starts) < n_starts + (warm_start is not None):
        starts.append(base + 0.5 * rng.standard_normal(base.size))

    bounds = (
        [_BOUNDS_LOG_LS] * D + [_BOUNDS_LOG_SF2, _BOUNDS_LOG_SN2, _BOUNDS_MEAN]
    )
    best_theta, best_val = None, np.inf
    for theta0 in starts:
        theta0 = np.clip(theta0, [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(
            _neg_log_posterior,
            theta0,
            args=(X, y_std, mu_ls, sigma_ls),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": max_iter},
        )
        if res.fun < best_val:
            best_val = float(res.fun)
            best_theta = res.x
    if best_theta is None:
        raise RuntimeError("all hyperparameter optimization starts failed")
    return GPModel(
        X,
        y,
        log_ls=best_theta[:D],
        log_sf2=best_theta[D],
        log_sn2=best_theta[D + 1],
        mean_const=best_theta[D + 2],
        active_mask=active_mask,
        y_mean=y_mean,
        y_scale=y_scale,
        nll=best_val,
    )
