"""Synthetic benchmark functions embedded into high-dimensional unit cubes.

Each benchmark is a standard low-dimensional test function padded with
inactive "dummy" dimensions: the function value depends only on the
coordinates listed in ``active_indices``, which are mapped affinely from
[0, 1] onto the function's native box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BenchmarkSpec",
    "make_benchmark",
    "evaluate_true",
    "evaluate",
    "default_point",
    "BASE_FUNCTIONS",
]


def branin(x: np.ndarray) -> float:
    """Branin function on its native domain [-5, 10] x [0, 15]."""
    a = 1.0
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    r = 6.0
    s = 10.0
    t = 1.0 / (8.0 * math.pi)
    x1, x2 = x[0], x[1]
    return a * (x2 - b * x1**2 + c * x1 - r) ** 2 + s * (1 - t) * math.cos(x1) + s


def levy(x: np.ndarray) -> float:
    """Levy function on [-10, 10]^d, global minimum 0 at x = (1, ..., 1)."""
    w = 1.0 + (np.asarray(x, dtype=float) - 1.0) / 4.0
    term1 = math.sin(math.pi * w[0]) ** 2
    term3 = (w[-1] - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w[-1]) ** 2)
    wi = w[:-1]
    middle = np.sum((wi - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * wi + 1.0) ** 2))
    return float(term1 + middle + term3)


_HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMANN6_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)


def hartmann6(x: np.ndarray) -> float:
    """Hartmann-6 function on [0, 1]^6, global minimum ~ -3.32237."""
    x = np.asarray(x, dtype=float)
    inner = np.sum(_HARTMANN6_A * (x[None, :] - _HARTMANN6_P) ** 2, axis=1)
    return float(-np.sum(_HARTMANN6_ALPHA * np.exp(-inner)))


def griewank(x: np.ndarray) -> float:
    """Griewank function on [-600, 600]^d, global minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    idx = np.arange(1, x.size + 1, dtype=float)
    return float(np.sum(x**2) / 4000.0 - np.prod(np.cos(x / np.sqrt(idx))) + 1.0)


@dataclass(frozen=True)
class _BaseFunction:
    fn: object
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    optimum_value: float


def _base(name: str) -> _BaseFunction:
    """Resolve a base-function name, supporting generic levy<d>/griewank<d>."""
    key = name.lower()
    if key in BASE_FUNCTIONS:
        return BASE_FUNCTIONS[key]
    for prefix, fn, lo, hi in (("levy", levy, -10.0, 10.0), ("griewank", griewank, -600.0, 600.0)):
        if key.startswith(prefix) and key[len(prefix) :].isdigit():
            d = int(key[len(prefix) :])
            if d < 1:
                raise ValueError(f"invalid benchmark dimensionality in {name!r}")
            return _BaseFunction(fn, d, np.full(d, lo), np.full(d, hi), 0.0)
    raise ValueError(f"unknown benchmark {name!r}")


BASE_FUNCTIONS: dict[str, _BaseFunction] = {
    "branin2": _BaseFunction(
        branin, 2, np.array([-5.0, 0.0]), np.array([10.0, 15.0]), 0.39788735772973816
    ),
    "levy4": _BaseFunction(levy, 4, np.full(4, -10.0), np.full(4, 10.0), 0.0),
    "hartmann6": _BaseFunction(hartmann6, 6, np.zeros(6), np.ones(6), -3.32236801141551),
    "griewank8": _BaseFunction(griewank, 8, np.full(8, -600.0), np.full(8, 600.0), 0.0),
}


@dataclass(frozen=True)
class BenchmarkSpec:
    """A base function embedded into a D-dimensional unit cube.

    ``active_indices`` gives the positions of the base function's inputs
    inside the ambient space; all other coordinates have no effect on the
    noiseless value.
    """

    base_function: str
    ambient_dim: int
    active_indices: tuple[int, ...]
    noise_std: float = 0.0
    lower: np.ndarray = field(repr=False, default=None)
    upper: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        base = _base(self.base_function)
        if self.ambient_dim < base.dim:
            raise ValueError("ambient_dim smaller than the base function's dimensionality")
        if len(self.active_indices) != base.dim:
            raise ValueError(
                f"{self.base_function} needs {base.dim} active indices, "
                f"got {len(self.active_indices)}"
            )
        if len(set(self.active_indices)) != len(self.active_indices):
            raise ValueError("active_indices must be distinct")
        if any(i < 0 or i >= self.ambient_dim for i in self.active_indices):
            raise ValueError("active index out of range")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        object.__setattr__(self, "lower", base.lower)
        object.__setattr__(self, "upper", base.upper)

    @property
    def intrinsic_dim(self) -> int:
        return len(self.active_indices)

    @property
    def optimum_value(self) -> float:
        return _base(self.base_function).optimum_value

    def to_native(self, x_active: np.ndarray) -> np.ndarray:
        """Map unit-cube coordinates of the active block to the native box."""
        return self.lower + np.asarray(x_active, dtype=float) * (self.upper - self.lower)

    def from_native(self, x_native: np.ndarray) -> np.ndarray:
        return (np.asarray(x_native, dtype=float) - self.lower) / (self.upper - self.lower)


def make_benchmark(
    base_function: str,
    ambient_dim: int,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
    active_indices: tuple[int, ...] | None = None,
) -> BenchmarkSpec:
    """Build a spec, drawing active indices uniformly without replacement."""
    base = _base(base_function)
    if active_indices is None:
        if rng is None:
            raise ValueError("rng required when active_indices are not given")
        active_indices = tuple(
            int(i) for i in rng.choice(ambient_dim, size=base.dim, replace=False)
        )
    return BenchmarkSpec(
        base_function=base_function,
        ambient_dim=ambient_dim,
        active_indices=tuple(active_indices),
        noise_std=noise_std,
    )


def _check_point(spec: BenchmarkSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.ambient_dim,):
        raise ValueError(f"expected point of dimension {spec.ambient_dim}, got shape {x.shape}")
    if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
        raise ValueError("point outside the unit hypercube")
    return x


def evaluate_true(spec: BenchmarkSpec, x: np.ndarray) -> float:
    """Noiseless objective value; depends only on the active coordinates."""
    x = _check_point(spec, x)
    native = spec.to_native(x[list(spec.active_indices)])
    return float(_base(spec.base_function).fn(native))


def evaluate(spec: BenchmarkSpec, x: np.ndarray, rng: np.random.Generator) -> float:
    """Noisy observation: true value plus N(0, noise_std^2)."""
    y = evaluate_true(spec, x)
    if spec.noise_std > 0:
        y += spec.noise_std * rng.standard_normal()
    return y


def default_point(
    spec: BenchmarkSpec, mode: str = "center", rng: np.random.Generator | None = None
) -> np.ndarray:
    """Reference point for the group-testing phase.

    ``random`` mode is used when the center is near-optimal (e.g. Griewank).
    """
    if mode == "center":
        return np.full(spec.ambient_dim, 0.5)
    if mode == "random":
        if rng is None:
            raise ValueError("rng required for random default point")
        return rng.random(spec.ambient_dim)
    raise ValueError(f"unknown default-point mode {mode!r}")
