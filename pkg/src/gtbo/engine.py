"""Orchestration of the group-testing phase.

Runs variance estimation, then iterates: select a batch of maximally
informative groups, build test points by perturbing the grouped coordinates
away from the default point, evaluate, update the particle posterior, and
stop on convergence of all marginals or on budget exhaustion.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from gtbo.engine_utils import perturb_coordinates
from gtbo.groups import select_batch
from gtbo.particles import ParticleSet
from gtbo.variance import NoiseModel, estimate_with_probes

__all__ = [
    "GTConfig",
    "TestRecord",
    "GTResult",
    "make_test_point",
    "converged",
    "active_set",
    "run_group_testing",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GTConfig:
    """Group-testing phase settings."""

    max_tests: int = 300
    particles: int = 10_000
    prior_q: float = 0.05
    eta: float = 0.5
    c_lower: float = 5e-3
    c_upper: float = 0.9
    max_batch: int = 5
    mi_drop: float = 0.01
    n_def: int = 10
    max_act: int | None = None  # defaults to floor(sqrt(D))
    n_starts: int = 3
    mi_samples: int = 2048
    ess_fraction: float = 0.5
    variance_floor: float = 1e-12
    variance_of_signed_deviation: bool = True

    def __post_init__(self):
        if self.max_tests < 1:
            raise ValueError("max_tests must be positive")
        if not 0.0 < self.prior_q < 1.0:
            raise ValueError("prior_q must lie in (0, 1)")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not 0.0 < self.c_lower < self.c_upper < 1.0:
            raise ValueError("need 0 < c_lower < c_upper < 1")


@dataclass(frozen=True)
class TestRecord:
    """One group test: mask, perturbed point, observed difference."""

    group: np.ndarray
    point: np.ndarray
    z: float
    iteration: int


@dataclass
class GTResult:
    """Everything the group-testing phase hands to the BO phase."""

    marginal_trajectory: list[np.ndarray]
    active_set: list[int]
    records: list[TestRecord]
    evaluations: list[tuple[np.ndarray, float]]  # every paid (point, y), probes included
    noise_model: NoiseModel
    converged: bool
    iterations_used: int
    x_def: np.ndarray = field(default=None)

    def active_count_trajectory(self, eta: float = 0.5) -> np.ndarray:
        """Number of dimensions with marginal >= eta after each test."""
        return np.array([int(np.sum(m >= eta)) for m in self.marginal_trajectory])


def make_test_point(x_def: np.ndarray, group: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Perturb the grouped coordinates of the default point.

    Each grouped coordinate is redrawn uniformly until it is at least 0.4
    away from its default value; everything else stays at the default.
    """
    group = np.asarray(group)
    dims = np.nonzero(group)[0]
    return perturb_coordinates(x_def, dims, rng)


def converged(marginals: np.ndarray, c_lower: float, c_upper: float) -> bool:
    """True iff every marginal is certain: <= c_lower or >= c_upper."""
    if not 0.0 < c_lower < c_upper < 1.0:
        raise ValueError("need 0 < c_lower < c_upper < 1")
    m = np.asarray(marginals)
    return bool(np.all((m <= c_lower) | (m >= c_upper)))


def active_set(marginals: np.ndarray, eta: float) -> list[int]:
    """Indices whose marginal activity probability reaches the threshold."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    return [int(i) for i in np.nonzero(np.asarray(marginals) >= eta)[0]]


def run_group_testing(
    f,
    x_def: np.ndarray,
    D: int,
    config: GTConfig,
    rng: np.random.Generator,
) -> GTResult:
    """Full group-testing phase on a noisy evaluator f(point) -> y."""
    max_act = config.max_act
    if max_act is None:
        max_act = int(math.floor(math.sqrt(D)))
    nm, probes = estimate_with_probes(
        f,
        x_def,
        D,
        n_def=config.n_def,
        max_act=max_act,
        rng=rng,
        variance_floor=config.variance_floor,
        variance_of_signed_deviation=config.variance_of_signed_deviation,
    )
    evaluations = list(probes)
    ps = ParticleSet(
        config.particles, D, config.prior_q, rng, ess_fraction=config.ess_fraction
    )
    records: list[TestRecord] = []
    trajectory: list[np.ndarray] = []
    tests_used = 0
    is_converged = False
    while tests_used < config.max_tests and not is_converged:
        batch = select_batch(
            ps,
            nm,
            rng,
            max_batch=min(config.max_batch, config.max_tests - tests_used),
            mi_drop=config.mi_drop,
            n_starts=config.n_starts,
            mi_samples=config.mi_samples,
        )
        if not batch:
            logger.warning("group selection returned no groups; stopping early")
            break
        # Evaluations, not batches, count toward the test budget.
        for group in batch:
            x = make_test_point(x_def, group, rng)
            y = f(x)
            z = y - nm.f_def_hat
            tests_used += 1
            ps.update(group, z, nm)
            records.append(TestRecord(group=group, point=x, z=float(z), iteration=tests_used))
            evaluations.append((x, float(y)))
            trajectory.append(ps.marginals())
        ps.maybe_rejuvenate(nm, rng)
        is_converged = converged(trajectory[-1], config.c_lower, config.c_upper)
    final_marginals = trajectory[-1] if trajectory else ps.marginals()
    selected = active_set(final_marginals, config.eta)
    if not selected:
        logger.warning("group testing found no active dimensions (degenerate outcome)")
    return GTResult(
        marginal_trajectory=trajectory,
        active_set=selected,
        records=records,
        evaluations=evaluations,
        noise_model=nm,
        converged=is_converged,
        iterations_used=tests_used,
        x_def=np.array(x_def, dtype=float),
    )
