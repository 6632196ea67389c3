"""Mutual information between the activity state and a test observation.

The observation for a candidate group is a zero-mean two-component Gaussian
mixture (noise component if the group misses all active dimensions, signal
component otherwise). The mixture entropy has no closed form and is
estimated by Monte Carlo; subtracting the probability-weighted component
entropies yields the mutual information used for group selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MIEstimate", "gaussian_entropy", "gmm_entropy_mc", "mutual_information", "MiEvaluator"]

_LOG_2PI = math.log(2.0 * math.pi)


def gaussian_entropy(variance: float) -> float:
    """Differential entropy of N(0, variance) in nats."""
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


def _mixture_logpdf(z: np.ndarray, p_active, sigma_n_sq: float, sigma_sq: float) -> np.ndarray:
    """Log density of the two-component zero-mean mixture, safe at p in {0, 1}."""
    p = np.clip(np.asarray(p_active, dtype=float), 0.0, 1.0)
    log_sig = -0.5 * (_LOG_2PI + math.log(sigma_sq) + z * z / sigma_sq)
    log_noise = -0.5 * (_LOG_2PI + math.log(sigma_n_sq) + z * z / sigma_n_sq)
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(p) + log_sig, np.log1p(-p) + log_noise)


def gmm_entropy_mc(
    p_active: float,
    sigma_n_sq: float,
    sigma_sq: float,
    n_samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of the mixture entropy in nats."""
    if not 0.0 <= p_active <= 1.0:
        raise ValueError("p_active must lie in [0, 1]")
    if sigma_n_sq <= 0 or sigma_sq <= 0:
        raise ValueError("variances must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    from_signal = rng.random(n_samples) < p_active
    scale = np.where(from_signal, math.sqrt(sigma_sq), math.sqrt(sigma_n_sq))
    z = scale * rng.standard_normal(n_samples)
    return float(-np.mean(_mixture_logpdf(z, p_active, sigma_n_sq, sigma_sq)))


@dataclass(frozen=True)
class MIEstimate:
    """MI estimate in nats; raw value kept for diagnostics, clamped for selection."""

    value: float
    raw_value: float
    mc_samples: int
    p_active: float


def mutual_information(
    p_active: float,
    nm,
    n_samples: int,
    rng: np.random.Generator,
) -> MIEstimate:
    """MI between the activity indicator and the observation for one group.

    Mixture entropy (Monte Carlo) minus the probability-weighted closed-form
    component entropies.
    """
    h_mix = gmm_entropy_mc(p_active, nm.sigma_n_sq, nm.sigma_sq, n_samples, rng)
    h_cond = (1.0 - p_active) * gaussian_entropy(nm.sigma_n_sq) + p_active * gaussian_entropy(
        nm.sigma_sq
    )
    raw = h_mix - h_cond
    if nm.sigma_sq == nm.sigma_n_sq:
        raw = 0.0
    return MIEstimate(
        value=max(raw, 0.0), raw_value=raw, mc_samples=n_samples, p_active=p_active
    )


class MiEvaluator:
    """MI as a function of group-activeness probability, with common random numbers.

    One fixed set of standard normals and component-assignment uniforms is
    drawn per selection round and reused for every candidate group, so MI
    comparisons between candidates are not corrupted by independent Monte
    Carlo noise and the greedy argmax is stable and deterministic.
    """

    def __init__(self, nm, n_samples: int, rng: np.random.Generator):
        self.sigma_n_sq = nm.sigma_n_sq
        self.sigma_sq = nm.sigma_sq
        self.n_samples = n_samples
        self._eps = rng.standard_normal(n_samples)
        self._uniforms = rng.random(n_samples)
        self._h_noise = gaussian_entropy(nm.sigma_n_sq)
        self._h_signal = gaussian_entropy(nm.sigma_sq)

    def mi(self, p_active) -> np.ndarray | float:
        """Clamped MI for a scalar or vector of activeness probabilities."""
        p = np.clip(np.atleast_1d(np.asarray(p_active, dtype=float)), 0.0, 1.0)
        from_signal = self._uniforms[None, :] < p[:, None]
        z = np.where(
            from_signal,
            math.sqrt(self.sigma_sq) * self._eps[None, :],
            math.sqrt(self.sigma_n_sq) * self._eps[None, :],
        )
        h_mix = -np.mean(
            _mixture_logpdf(z, p[:, None], self.sigma_n_sq, self.sigma_sq), axis=1
        )
        raw = h_mix - ((1.0 - p) * self._h_noise + p * self._h_signal)
        if self.sigma_sq == self.sigma_n_sq:
            raw = np.zeros_like(raw)
        out = np.maximum(raw, 0.0)
        if np.isscalar(p_active) or np.asarray(p_active).ndim == 0:
            return float(out[0])
        return out
