"""Tests for Gaussian mixture entropy and mutual information estimates.

The non-trivial reference values come from adaptive quadrature over the
mixture density, computed inside the tests with scipy.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from gtbo.information import (
    MiEvaluator,
    gaussian_entropy,
    gmm_entropy_mc,
    mutual_information,
)
from gtbo.variance import NoiseModel


def quadrature_mixture_entropy(p, sigma_n_sq, sigma_sq):
    """Oracle: -integral of f log f for the two-component mixture."""

    def pdf(z):
        a = math.exp(-0.5 * z * z / sigma_sq) / math.sqrt(2 * math.pi * sigma_sq)
        b = math.exp(-0.5 * z * z / sigma_n_sq) / math.sqrt(2 * math.pi * sigma_n_sq)
        return p * a + (1 - p) * b

    def integrand(z):
        f = pdf(z)
        return -f * math.log(f) if f > 0 else 0.0

    hi = 12.0 * math.sqrt(max(sigma_sq, sigma_n_sq))
    val, err = integrate.quad(integrand, -hi, hi, limit=400, points=[0.0])
    assert err < 1e-6
    return val


def binary_entropy(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_gaussian_entropy_closed_form():
    assert gaussian_entropy(1.0) == pytest.approx(0.5 * math.log(2 * math.pi * math.e))
    assert gaussian_entropy(1.0) == pytest.approx(1.4189385, abs=1e-6)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_degenerate_mixture_matches_gaussian_entropy(p):
    rng = np.random.default_rng(0)
    var = 1.0 if p == 0.0 else 4.0
    h = gmm_entropy_mc(p, 1.0, 4.0, 100_000, rng)
    assert h == pytest.approx(gaussian_entropy(var), abs=0.01)


def test_mixture_entropy_against_quadrature():
    rng = np.random.default_rng(1)
    for p, sn2, s2 in [(0.5, 1.0, 1e4), (0.2, 0.5, 50.0), (0.8, 1.0, 9.0)]:
        oracle = quadrature_mixture_entropy(p, sn2, s2)
        h = gmm_entropy_mc(p, sn2, s2, 200_000, rng)
        assert h == pytest.approx(oracle, abs=0.02)


def test_mi_well_separated_approaches_binary_entropy():
    # sigma/sigma_n = 100 at p = 0.5: the observation almost identifies the
    # component, so MI approaches ln 2 (the residual overlap of the two
    # densities near zero costs about 0.05 nats). The binding check is
    # agreement with the quadrature oracle.
    nm = NoiseModel(0.0, 1.0, 1e4, 10, 4)
    oracle = quadrature_mixture_entropy(0.5, 1.0, 1e4) - (
        0.5 * gaussian_entropy(1.0) + 0.5 * gaussian_entropy(1e4)
    )
    assert oracle == pytest.approx(math.log(2), abs=0.06)
    est = mutual_information(0.5, nm, 200_000, np.random.default_rng(2))
    assert est.value == pytest.approx(oracle, abs=0.02)


def test_mi_zero_at_degenerate_probabilities():
    nm = NoiseModel(0.0, 1.0, 100.0, 10, 4)
    rng = np.random.default_rng(3)
    for p in (0.0, 1.0):
        est = mutual_information(p, nm, 100_000, rng)
        assert est.value == pytest.approx(0.0, abs=0.01)
        assert est.value >= 0.0


def test_mi_exactly_zero_when_variances_equal():
    nm = NoiseModel(0.0, 2.0, 2.0, 10, 4)
    est = mutual_information(0.5, nm, 10_000, np.random.default_rng(4))
    assert est.value == 0.0
    assert est.raw_value == 0.0


def test_mi_bounded_by_binary_entropy_on_grid():
    rng = np.random.default_rng(5)
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        for ratio in (1.0, 2.0, 10.0, 100.0, 1000.0):
            nm = NoiseModel(0.0, 1.0, ratio**2, 10, 4)
            est = mutual_information(p, nm, 50_000, rng)
            assert est.value <= binary_entropy(p) + 0.02


def test_mi_monotone_in_variance_ratio():
    evaluator_mis = []
    for ratio in (1.0, 3.0, 10.0, 30.0, 100.0):
        nm = NoiseModel(0.0, 1.0, ratio**2, 10, 4)
        mi_eval = MiEvaluator(nm, 100_000, np.random.default_rng(6))
        evaluator_mis.append(mi_eval.mi(0.5))
    assert all(a <= b + 0.01 for a, b in zip(evaluator_mis, evaluator_mis[1:]))


def test_mi_interior_maximum_over_p():
    # For a well-separated mixture MI is concave-shaped in p with an
    # interior maximum, never maximized at the endpoints.
    nm = NoiseModel(0.0, 1.0, 100.0, 10, 4)
    mi_eval = MiEvaluator(nm, 50_000, np.random.default_rng(7))
    grid = np.linspace(0.0, 1.0, 21)
    values = mi_eval.mi(grid)
    best = int(np.argmax(values))
    assert 0 < best < len(grid) - 1
    assert values[0] == pytest.approx(0.0, abs=0.02)
    assert values[-1] == pytest.approx(0.0, abs=0.02)


def test_evaluator_deterministic_and_consistent():
    nm = NoiseModel(0.0, 1.0, 400.0, 10, 4)
    a = MiEvaluator(nm, 4096, np.random.default_rng(8))
    b = MiEvaluator(nm, 4096, np.random.default_rng(8))
    grid = np.array([0.2, 0.5, 0.8])
    np.testing.assert_array_equal(a.mi(grid), b.mi(grid))
    # scalar and vector paths agree
    assert a.mi(0.5) == a.mi(np.array([0.5]))[0]


def test_input_validation():
    rng = np.random.default_rng(9)
    with pytest.raises(ValueError):
        gmm_entropy_mc(-0.1, 1.0, 2.0, 100, rng)
    with pytest.raises(ValueError):
        gmm_entropy_mc(0.5, 0.0, 2.0, 100, rng)
    with pytest.raises(ValueError):
        gmm_entropy_mc(0.5, 1.0, 2.0, 0, rng)
