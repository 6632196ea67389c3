"""Seeded experiment execution and on-disk artifacts.

Each seed gets its own subdirectory with marginals.csv, tests.jsonl,
trace.csv, noise_model.json and summary.json (random-search runs emit only
trace.csv). Sweeps rerun the experiment per axis value and aggregate the
per-iteration correct-classification percentage into sweep.csv.
"""

from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from gtbo.benchmarks import default_point, evaluate, evaluate_true, make_benchmark
from gtbo.config import RunConfig
from gtbo.engine import run_group_testing
from gtbo.optimizer import BOTrace, random_search, run_bo

__all__ = [
    "run_experiment",
    "run_seed",
    "run_sweep",
    "classification_accuracy",
    "SENSITIVITY_INACTIVE_BELOW",
    "SENSITIVITY_ACTIVE_ABOVE",
]

# A dimension counts as correctly classified when its marginal is below 1%
# (truly inactive) or above 90% (truly active).
SENSITIVITY_INACTIVE_BELOW = 0.01
SENSITIVITY_ACTIVE_ABOVE = 0.9


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def run_seed(config: RunConfig, seed: int, out_dir: Path) -> dict:
    """Execute one seeded run and write its artifacts; returns the summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    spec = make_benchmark(
        config.benchmark_name,
        config.ambient_dim,
        config.noise_std,
        rng=rng,
        active_indices=config.active_indices,
    )
    x_def = default_point(spec, config.default_mode, rng)

    def f(x):
        return evaluate(spec, x, rng)

    if config.method == "random_search":
        budget = config.total_budget or config.bo.budget
        trace = random_search(f, spec.ambient_dim, budget, rng)
        _write_trace(out_dir / "trace.csv", trace, spec)
        return {"method": "random_search", "seed": seed}

    gt = run_group_testing(f, x_def, spec.ambient_dim, config.gt, rng)
    if config.total_budget is not None:
        bo_budget = max(config.total_budget - len(gt.evaluations), 0)
    else:
        bo_budget = config.bo.budget
    trace = run_bo(f, gt, bo_budget, rng, config.bo)

    _write_marginals(out_dir / "marginals.csv", gt)
    _write_tests(out_dir / "tests.jsonl", gt)
    _write_trace(out_dir / "trace.csv", trace, spec)
    with open(out_dir / "noise_model.json", "w") as fh:
        json.dump(dataclasses.asdict(gt.noise_model), fh, indent=2)
        fh.write("\n")

    truth = sorted(spec.active_indices)
    found = sorted(gt.active_set)
    false_positives = len(set(found) - set(truth))
    false_negatives = len(set(truth) - set(found))
    best_idx = int(np.argmin(trace.ys))
    true_best = min(
        evaluate_true(spec, p) for p in trace.points
    )
    summary = {
        "method": "gtbo",
        "benchmark": config.benchmark_name,
        "seed": seed,
        "ambient_dim": spec.ambient_dim,
        "active_indices_true": truth,
        "active_set": found,
        "converged": bool(gt.converged),
        "convergence_iteration": gt.iterations_used if gt.converged else None,
        "gt_tests": gt.iterations_used,
        "gt_evaluations": len(gt.evaluations),
        "total_evaluations": len(trace.ys),
        "false_positives": false_positives,
        "false_negatives": false_negatives,
        "best_observed": float(trace.ys[best_idx]),
        "true_regret": float(true_best - spec.optimum_value),
        "runtime_seconds": time.perf_counter() - t0,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def _write_marginals(path: Path, gt) -> None:
    D = len(gt.x_def)
    header = ["iteration"] + [f"m_{i}" for i in range(D)]
    rows = (
        [str(it + 1)] + [_fmt(v) for v in marg]
        for it, marg in enumerate(gt.marginal_trajectory)
    )
    _write_csv(path, header, rows)


def _write_tests(path: Path, gt) -> None:
    with open(path, "w") as fh:
        for rec in gt.records:
            fh.write(
                json.dumps(
                    {
                        "iteration": rec.iteration,
                        "group": [int(i) for i in np.nonzero(rec.group)[0]],
                        "point": [float(v) for v in rec.point],
                        "z": rec.z,
                    }
                )
                + "\n"
            )


def _write_trace(path: Path, trace: BOTrace, spec) -> None:
    best = np.minimum.accumulate(np.asarray(trace.ys)) if trace.ys else np.array([])
    true_vals = np.array([evaluate_true(spec, p) for p in trace.points])
    true_best = np.minimum.accumulate(true_vals) if len(true_vals) else true_vals
    rows = (
        [str(i + 1), _fmt(trace.ys[i]), _fmt(best[i]), _fmt(true_best[i] - spec.optimum_value)]
        for i in range(len(trace.ys))
    )
    _write_csv(path, ["evaluation", "y", "best_y", "true_regret"], rows)


def run_experiment(config: RunConfig) -> list[dict]:
    """Run every configured seed; returns the per-seed summaries."""
    summaries = []
    for seed in config.seeds:
        out_dir = config.output_dir / f"seed_{seed}"
        summaries.append(run_seed(config, seed, out_dir))
    return summaries


def classification_accuracy(marginal_trajectory, true_active: set[int]) -> np.ndarray:
    """Percent of dimensions correctly classified after each iteration."""
    pct = []
    for marg in marginal_trajectory:
        correct = 0
        for i, m in enumerate(marg):
            if i in true_active:
                correct += m > SENSITIVITY_ACTIVE_ABOVE
            else:
                correct += m < SENSITIVITY_INACTIVE_BELOW
        pct.append(100.0 * correct / len(marg))
    return np.asarray(pct)


def run_sweep(config: RunConfig) -> Path:
    """Run the configured sweep; emits <output_dir>/sweep.csv."""
    if config.sweep is None:
        raise ValueError("config has no [sweep] block")
    axis, values = config.sweep.axis, config.sweep.values
    rows = []
    for value in values:
        sub = config.with_axis_value(axis, value)
        sub = dataclasses.replace(
            sub, output_dir=config.output_dir / f"{axis}_{value}", sweep=None
        )
        for seed in sub.seeds:
            out_dir = sub.output_dir / f"seed_{seed}"
            run_seed(sub, seed, out_dir)
            marg_path = out_dir / "marginals.csv"
            with open(out_dir / "summary.json") as fh:
                summary = json.load(fh)
            trajectory = _read_marginals(marg_path)
            pct = classification_accuracy(trajectory, set(summary["active_indices_true"]))
            for it, p in enumerate(pct, start=1):
                rows.append([str(value), str(seed), str(it), _fmt(p)])
    config.output_dir.mkdir(parents=True, exist_ok=True)
    sweep_path = config.output_dir / "sweep.csv"
    _write_csv(sweep_path, [axis, "seed", "iteration", "correct_pct"], rows)
    return sweep_path


def _read_marginals(path: Path) -> list[np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return [row[1:] for row in data]
