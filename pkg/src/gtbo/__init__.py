"""Group-testing Bayesian optimization (GTBO).

Two-phase optimizer for high-dimensional noisy black-box functions: a group
testing phase identifies the active input dimensions with an SMC posterior
over activity states, then a Gaussian-process BO phase concentrates the
remaining budget on those dimensions.
"""

from gtbo.benchmarks import BenchmarkSpec, make_benchmark
from gtbo.engine import GTConfig, GTResult, run_group_testing
from gtbo.optimizer import BOConfig, BOTrace, run_bo
from gtbo.variance import NoiseModel

__all__ = [
    "BenchmarkSpec",
    "make_benchmark",
    "GTConfig",
    "GTResult",
    "run_group_testing",
    "BOConfig",
    "BOTrace",
    "run_bo",
    "NoiseModel",
]

__version__ = "0.1.0"
