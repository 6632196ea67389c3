"""SMC posterior over binary activity states.

A ParticleSet holds M binary vectors with normalized weights approximating
the posterior over which dimensions are active. Test observations reweight
the particles with the two-component Gaussian likelihood; degeneracy is
handled by systematic resampling followed by one Gibbs sweep per particle
conditioned on the full test history.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit, logsumexp

from gtbo.variance import NoiseModel

__all__ = ["ParticleSet", "gaussian_logpdf"]

_LOG_2PI = math.log(2.0 * math.pi)


def gaussian_logpdf(z: float, variance: float) -> float:
    """Log density of N(0, variance) at z."""
    return -0.5 * (_LOG_2PI + math.log(variance) + z * z / variance)


class ParticleSet:
    """Weighted particle approximation of the activity-state posterior."""

    def __init__(
        self,
        M: int,
        D: int,
        prior_q: np.ndarray | float,
        rng: np.random.Generator,
        ess_fraction: float = 0.5,
    ):
        if M < 1:
            raise ValueError("M must be positive")
        prior_q = np.broadcast_to(np.asarray(prior_q, dtype=float), (D,)).copy()
        if np.any(prior_q <= 0) or np.any(prior_q >= 1):
            raise ValueError("prior activity probabilities must lie in (0, 1)")
        self.M = M
        self.D = D
        self.prior_q = prior_q
        self.ess_fraction = ess_fraction
        self.particles = (rng.random((M, D)) < prior_q[None, :]).astype(np.int8)
        self.log_weights = np.full(M, -math.log(M))
        # Test history and per-particle active-hit counts per historic group.
        self.history_groups: list[np.ndarray] = []
        self.history_z: list[float] = []
        self._hit_counts = np.zeros((M, 0), dtype=np.int32)

    # -- queries ---------------------------------------------------------

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def ess(self) -> float:
        """Effective sample size 1 / sum(w^2)."""
        return float(1.0 / np.sum(self.weights**2))

    def group_active_probability(self, group: np.ndarray) -> float:
        """Weighted fraction of particles with at least one hit in the group."""
        group = np.asarray(group)
        if group.shape != (self.D,):
            raise ValueError("group dimension mismatch")
        hit = (self.particles @ group) >= 1
        return float(np.sum(self.weights[hit]))

    def marginals(self) -> np.ndarray:
        """Per-dimension posterior activity probability."""
        return self.weights @ self.particles

    # -- updates ---------------------------------------------------------

    def update(
        self,
        group: np.ndarray,
        z: float,
        nm: NoiseModel,
        rng: np.random.Generator | None = None,
    ) -> "ParticleSet":
        """Reweight particles with the observation z for the tested group.

        If an rng is passed, degeneracy is checked immediately and a
        resample-move step runs when ESS drops below the threshold. Batch
        callers pass rng=None and call maybe_rejuvenate once per batch.
        """
        group = np.asarray(group, dtype=np.int8)
        ll_active = gaussian_logpdf(z, nm.sigma_sq)
        ll_inactive = gaussian_logpdf(z, nm.sigma_n_sq)
        hit = (self.particles @ group) >= 1
        self.log_weights = self.log_weights + np.where(hit, ll_active, ll_inactive)
        self._normalize()
        self.history_groups.append(group)
        self.history_z.append(float(z))
        self._hit_counts = np.concatenate(
            [self._hit_counts, (self.particles @ group).astype(np.int32)[:, None]], axis=1
        )
        if rng is not None:
            self.maybe_rejuvenate(nm, rng)
        return self

    def maybe_rejuvenate(self, nm: NoiseModel, rng: np.random.Generator) -> bool:
        """Run resample_move when the ESS falls below its threshold."""
        if self.ess() < self.ess_fraction * self.M:
            self.resample_move(nm, rng)
            return True
        return False

    def resample_move(self, nm: NoiseModel, rng: np.random.Generator) -> "ParticleSet":
        """Systematic resampling to uniform weights, then one Gibbs sweep.

        A no-op before any test has been observed (nothing to condition on).
        The Gibbs kernel leaves the current posterior invariant, so the
        represented distribution is unchanged up to Monte Carlo error.
        """
        if not self.history_groups:
            return self
        self._systematic_resample(rng)
        self._gibbs_sweep(nm, rng)
        return self

    # -- internals -------------------------------------------------------

    def _normalize(self):
        total = logsumexp(self.log_weights)
        if not np.isfinite(total):
            raise FloatingPointError(
                "particle weights degenerated to zero; observation likelihoods "
                "are not representable even in log space"
            )
        self.log_weights = self.log_weights - total

    def _systematic_resample(self, rng: np.random.Generator):
        positions = (rng.random() + np.arange(self.M)) / self.M
        cumulative = np.cumsum(self.weights)
        cumulative[-1] = 1.0
        idx = np.searchsorted(cumulative, positions)
        self.particles = self.particles[idx]
        self._hit_counts = self._hit_counts[idx]
        self.log_weights = np.full(self.M, -math.log(self.M))

    def _gibbs_sweep(self, nm: NoiseModel, rng: np.random.Generator):
        """One full-conditional redraw of every coordinate of every particle.

        Flipping coordinate i only changes the group-hit indicator for
        historic tests whose group contains i and whose other members
        contribute no hit, so per-particle hit counts make each coordinate
        an O(tests containing i) vectorized update.
        """
        groups = np.stack(self.history_groups)  # (T, D)
        zs = np.asarray(self.history_z)
        delta_ll = np.array(
            [gaussian_logpdf(z, nm.sigma_sq) - gaussian_logpdf(z, nm.sigma_n_sq) for z in zs]
        )
        logit_q = np.log(self.prior_q) - np.log1p(-self.prior_q)
        uniforms = rng.random((self.M, self.D))
        for i in range(self.D):
            tests_i = np.nonzero(groups[:, i])[0]
            if tests_i.size == 0:
                logits = np.full(self.M, logit_q[i])
            else:
                rest = self._hit_counts[:, tests_i] - self.particles[:, i : i + 1]
                # Likelihood only differs where this coordinate decides the hit.
                contrib = (rest == 0).astype(float) @ delta_ll[tests_i]
                logits = logit_q[i] + contrib
            new_bits = (uniforms[:, i] < expit(logits)).astype(np.int8)
            diff = (new_bits - self.particles[:, i]).astype(np.int32)
            if tests_i.size and np.any(diff):
                self._hit_counts[:, tests_i] += diff[:, None]
            self.particles[:, i] = new_bits
