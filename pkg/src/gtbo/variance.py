"""Signal and noise variance estimation from binned perturbation probes.

Before group testing starts, the default value f(x_def) is estimated from
repeated evaluations, the dimensions are split into 3*floor(sqrt(D)) random
bins, and each bin is perturbed jointly once. The smallest absolute
deviations from the default estimate give the noise variance, the largest
give the signal variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gtbo.engine_utils import perturb_coordinates

__all__ = ["NoiseModel", "estimate", "estimate_with_probes"]

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    """Estimated default value and observation/signal variances.

    sigma_sq is clamped to at least sigma_n_sq, and both variances are
    floored to avoid degenerate likelihoods.
    """

    f_def_hat: float
    sigma_n_sq: float
    sigma_sq: float
    n_def: int
    max_act: int

    def __post_init__(self):
        if self.sigma_n_sq <= 0 or self.sigma_sq <= 0:
            raise ValueError("variances must be strictly positive")
        if self.sigma_sq < self.sigma_n_sq:
            raise ValueError("sigma_sq must be at least sigma_n_sq")


def _partition_bins(D: int, n_bins: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Split dimension indices into near-equal random bins."""
    perm = rng.permutation(D)
    return [np.sort(chunk) for chunk in np.array_split(perm, n_bins)]


def estimate_with_probes(
    f,
    x_def: np.ndarray,
    D: int,
    n_def: int = 10,
    max_act: int | None = None,
    rng: np.random.Generator | None = None,
    variance_floor: float = VARIANCE_FLOOR,
    variance_of_signed_deviation: bool = True,
) -> tuple[NoiseModel, list[tuple[np.ndarray, float]]]:
    """Estimate the noise model; also return every probe (point, y) pair.

    The probes (default replicates and bin perturbations) are paid
    evaluations and get recycled as training data for the BO phase.
    """
    if rng is None:
        raise ValueError("rng is required")
    if D < 4:
        raise ValueError("need at least 4 dimensions for binned variance estimation")
    if n_def < 2:
        raise ValueError("n_def must be at least 2")
    root = int(np.floor(np.sqrt(D)))
    n_bins = 3 * root
    if max_act is None:
        max_act = root
    if not (1 <= max_act <= n_bins - 2):
        raise ValueError(f"max_act must be in [1, {n_bins - 2}]")

    probes: list[tuple[np.ndarray, float]] = []
    y_def = np.empty(n_def)
    for j in range(n_def):
        y_def[j] = f(x_def)
        probes.append((x_def.copy(), float(y_def[j])))
    f_def_hat = float(np.mean(y_def))

    bins = _partition_bins(D, n_bins, rng)
    deviations = np.empty(n_bins)
    for j, bin_dims in enumerate(bins):
        x = perturb_coordinates(x_def, bin_dims, rng)
        y = f(x)
        probes.append((x, float(y)))
        deviations[j] = y - f_def_hat
    if not variance_of_signed_deviation:
        deviations = np.abs(deviations)
    order = np.argsort(np.abs(deviations), kind="stable")
    n_noise = n_bins - max_act
    if n_noise < 2 or max_act < 2:
        raise ValueError("both variance partitions need at least 2 samples")
    sigma_n_sq = float(np.var(deviations[order[:n_noise]], ddof=1))
    sigma_sq = float(np.var(deviations[order[n_noise:]], ddof=1))
    sigma_n_sq = max(sigma_n_sq, variance_floor)
    sigma_sq = max(sigma_sq, sigma_n_sq)
    nm = NoiseModel(
        f_def_hat=f_def_hat,
        sigma_n_sq=sigma_n_sq,
        sigma_sq=sigma_sq,
        n_def=n_def,
        max_act=max_act,
    )
    return nm, probes


def estimate(
    f,
    x_def: np.ndarray,
    D: int,
    n_def: int = 10,
    max_act: int | None = None,
    rng: np.random.Generator | None = None,
    **kwargs,
) -> NoiseModel:
    """Like estimate_with_probes, discarding the probe log."""
    nm, _ = estimate_with_probes(f, x_def, D, n_def=n_def, max_act=max_act, rng=rng, **kwargs)
    return nm
