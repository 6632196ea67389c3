"""Run configuration: TOML parsing and validation.

A run config has a benchmark block, a gt block, a bo block, a seed list and
an output directory; an optional sweep block lists an axis and its values.
The GTBO_OUTPUT_ROOT environment variable re-roots relative output paths.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from gtbo.engine import GTConfig
from gtbo.gp import LengthscalePriors
from gtbo.optimizer import BOConfig

__all__ = ["ConfigError", "RunConfig", "SweepSpec", "load_config", "DEFAULT_NOISE_STD"]

OUTPUT_ROOT_ENV = "GTBO_OUTPUT_ROOT"

DEFAULT_NOISE_STD = {
    "branin2": 0.5,
    "levy4": 0.1,
    "hartmann6": 0.01,
    "griewank8": 0.5,
}

SWEEP_AXES = (
    "noise_std",
    "ambient_dim",
    "active_dim",
    "max_batch",
    "prior_q",
    "max_act",
    "particles",
    "inactive_prior_mu",
)


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple


@dataclass(frozen=True)
class RunConfig:
    method: str
    seeds: tuple[int, ...]
    output_dir: Path
    benchmark_name: str
    ambient_dim: int
    noise_std: float
    default_mode: str
    active_indices: tuple[int, ...] | None
    gt: GTConfig
    bo: BOConfig
    total_budget: int | None = None
    sweep: SweepSpec | None = None

    def with_axis_value(self, axis: str, value) -> "RunConfig":
        """A copy of this config with one sweep axis set to the given value."""
        if axis == "noise_std":
            return replace(self, noise_std=float(value))
        if axis == "ambient_dim":
            return replace(self, ambient_dim=int(value))
        if axis == "active_dim":
            m = re.fullmatch(r"([a-z]+)(\d+)", self.benchmark_name.lower())
            if m is None or m.group(1) not in ("levy", "griewank"):
                raise ConfigError(
                    "active_dim sweeps need a levy<d> or griewank<d> benchmark"
                )
            return replace(self, benchmark_name=f"{m.group(1)}{int(value)}")
        if axis in ("max_batch", "prior_q", "max_act", "particles"):
            cast = float if axis == "prior_q" else int
            return replace(self, gt=replace(self.gt, **{axis: cast(value)}))
        if axis == "inactive_prior_mu":
            priors = replace(self.bo.priors, inactive_mu=float(value))
            return replace(self, bo=replace(self.bo, priors=priors))
        raise ConfigError(f"unknown sweep axis {axis!r}")


def _get(table: dict, key: str, default=None):
    return table.get(key, default)


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    method = _get(raw, "method", "gtbo")
    if method not in ("gtbo", "random_search"):
        raise ConfigError(f"method must be 'gtbo' or 'random_search', got {method!r}")
    seeds = raw.get("seeds")
    if not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("seeds must be a non-empty list of integers")
    output_dir = raw.get("output_dir")
    if not output_dir:
        raise ConfigError("output_dir is required")
    output_dir = Path(output_dir)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not output_dir.is_absolute():
        output_dir = Path(root) / output_dir

    bench = raw.get("benchmark")
    if not isinstance(bench, dict):
        raise ConfigError("a [benchmark] block is required")
    name = bench.get("name")
    if not name:
        raise ConfigError("benchmark.name is required")
    name = str(name).lower()
    ambient_dim = bench.get("ambient_dim")
    if not isinstance(ambient_dim, int) or ambient_dim < 4:
        raise ConfigError("benchmark.ambient_dim must be an integer >= 4")
    noise_std = bench.get("noise_std", DEFAULT_NOISE_STD.get(name, 0.0))
    if noise_std < 0:
        raise ConfigError("benchmark.noise_std must be non-negative")
    default_mode = bench.get("default_mode", "random" if name.startswith("griewank") else "center")
    if default_mode not in ("center", "random"):
        raise ConfigError("benchmark.default_mode must be 'center' or 'random'")
    active_indices = bench.get("active_indices")
    if active_indices is not None:
        active_indices = tuple(int(i) for i in active_indices)

    gt_raw = raw.get("gt", {})
    try:
        gt = GTConfig(
            max_tests=_get(gt_raw, "max_tests", 300),
            particles=_get(gt_raw, "particles", 10_000),
            prior_q=_get(gt_raw, "prior_q", 0.05),
            eta=_get(gt_raw, "eta", 0.5),
            c_lower=_get(gt_raw, "c_lower", 5e-3),
            c_upper=_get(gt_raw, "c_upper", 0.9),
            max_batch=_get(gt_raw, "max_batch", 5),
            mi_drop=_get(gt_raw, "mi_drop", 0.01),
            n_def=_get(gt_raw, "n_def", 10),
            max_act=_get(gt_raw, "max_act"),
            n_starts=_get(gt_raw, "n_starts", 3),
            mi_samples=_get(gt_raw, "mi_samples", 2048),
            variance_of_signed_deviation=_get(gt_raw, "variance_of_signed_deviation", True),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid gt block: {exc}") from exc

    bo_raw = raw.get("bo", {})
    priors = LengthscalePriors(
        active_mu=_get(bo_raw, "active_prior_mu", 0.0),
        active_sigma=_get(bo_raw, "active_prior_sigma", 1.0),
        inactive_mu=_get(bo_raw, "inactive_prior_mu", 7.0),
        inactive_sigma=_get(bo_raw, "inactive_prior_sigma", 1.0),
    )
    budget = _get(bo_raw, "budget", 100)
    total_budget = _get(bo_raw, "total_budget")
    if budget < 0:
        raise ConfigError("bo.budget must be non-negative")
    if total_budget is not None and total_budget < 1:
        raise ConfigError("bo.total_budget must be positive")
    bo = BOConfig(
        budget=budget,
        dedupe_tol=_get(bo_raw, "dedupe_tol", 1e-6),
        n_candidates=_get(bo_raw, "n_candidates", 512),
        n_refine=_get(bo_raw, "n_refine", 10),
        priors=priors,
        fit_starts=_get(bo_raw, "fit_starts", 8),
        refit_starts=_get(bo_raw, "refit_starts", 2),
    )

    sweep = None
    sweep_raw = raw.get("sweep")
    if sweep_raw is not None:
        axis = sweep_raw.get("axis")
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}")
        values = sweep_raw.get("values")
        if not values:
            raise ConfigError("sweep.values must be a non-empty list")
        sweep = SweepSpec(axis=axis, values=tuple(values))

    cfg = RunConfig(
        method=method,
        seeds=tuple(seeds),
        output_dir=output_dir,
        benchmark_name=name,
        ambient_dim=ambient_dim,
        noise_std=float(noise_std),
        default_mode=default_mode,
        active_indices=active_indices,
        gt=gt,
        bo=bo,
        total_budget=total_budget,
        sweep=sweep,
    )
    # Surface benchmark-name errors at validation time.
    from gtbo.benchmarks import _base

    try:
        base = _base(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if ambient_dim < base.dim:
        raise ConfigError("benchmark.ambient_dim smaller than the base function dimension")
    return cfg
