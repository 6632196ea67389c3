"""Shared helpers for building perturbed probe/test points."""

from __future__ import annotations

import numpy as np

__all__ = ["perturb_coordinates", "MIN_PERTURBATION_DISTANCE"]

# Every perturbed coordinate must end up at least this far from the default.
MIN_PERTURBATION_DISTANCE = 0.4


def perturb_coordinates(
    x_def: np.ndarray, dims: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Replace the given coordinates by uniform draws far from the default.

    Each coordinate is redrawn independently until it lies at distance
    >= 0.4 from its default value; all other coordinates are untouched.
    """
    x = np.array(x_def, dtype=float, copy=True)
    for i in np.atleast_1d(dims):
        while True:
            u = rng.random()
            if abs(u - x_def[i]) >= MIN_PERTURBATION_DISTANCE:
                x[i] = u
                break
    return x
