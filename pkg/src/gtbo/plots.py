"""Static SVG reports rendered from run artifacts.

All figures are deterministic: a fixed SVG hash salt, no timestamps, and a
provenance comment embedded in the file metadata.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from gtbo.runner import classification_accuracy, _read_marginals

__all__ = ["render", "PLOT_KINDS"]

PLOT_KINDS = ("marginals", "regret", "sensitivity", "active_count")

plt.rcParams["svg.hashsalt"] = "gtbo"

ACTIVE_COLOR = "tab:green"
INACTIVE_COLOR = "tab:blue"
FALSE_POSITIVE_COLOR = "tab:red"


def _seed_dirs(results_dir: Path) -> list[Path]:
    dirs = sorted(results_dir.glob("seed_*"))
    if not dirs:
        raise FileNotFoundError(f"no seed_* directories under {results_dir}")
    return dirs


def _save(fig, path: Path, provenance: str) -> Path:
    fig.savefig(
        path,
        format="svg",
        metadata={"Date": None, "Description": provenance},
        bbox_inches="tight",
    )
    plt.close(fig)
    return path


def _padded_marginals(seed_dirs: list[Path]) -> tuple[np.ndarray, list[dict]]:
    """Stack per-seed marginal trajectories, repeating the last row to align."""
    trajectories, summaries = [], []
    for d in seed_dirs:
        traj = _read_marginals(d / "marginals.csv")
        with open(d / "summary.json") as fh:
            summaries.append(json.load(fh))
        trajectories.append(np.vstack(traj))
    T = max(t.shape[0] for t in trajectories)
    padded = np.stack(
        [np.vstack([t, np.repeat(t[-1:], T - t.shape[0], axis=0)]) for t in trajectories]
    )
    return padded, summaries


def _plot_marginals(results_dir: Path, out: Path) -> Path:
    seed_dirs = _seed_dirs(results_dir)
    padded, summaries = _padded_marginals(seed_dirs)
    mean_traj = padded.mean(axis=0)  # (T, D)
    truth = set(summaries[0].get("active_indices_true", []))
    flagged = set()
    for s in summaries:
        flagged |= set(s.get("active_set", []))
    fig, ax = plt.subplots(figsize=(7, 4))
    iters = np.arange(1, mean_traj.shape[0] + 1)
    for i in range(mean_traj.shape[1]):
        if i in truth:
            color, lw, z = ACTIVE_COLOR, 1.6, 3
        elif i in flagged:
            color, lw, z = FALSE_POSITIVE_COLOR, 1.6, 4
        else:
            color, lw, z = INACTIVE_COLOR, 0.6, 2
        ax.plot(iters, mean_traj[:, i], color=color, lw=lw, zorder=z, alpha=0.8)
    ax.set_xlabel("group test")
    ax.set_ylabel("mean marginal activity probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(results_dir.name or "marginals")
    prov = f"gtbo marginals plot; source={results_dir}; seeds={len(seed_dirs)}"
    return _save(fig, out, prov)


def _plot_regret(results_dir: Path, out: Path) -> Path:
    seed_dirs = _seed_dirs(results_dir)
    curves = []
    for d in seed_dirs:
        data = np.genfromtxt(d / "trace.csv", delimiter=",", skip_header=1)
        data = np.atleast_2d(data)
        curves.append(data[:, 3])
    n = min(len(c) for c in curves)
    curves = np.stack([c[:n] for c in curves])
    mean = curves.mean(axis=0)
    stderr = curves.std(axis=0, ddof=1) / np.sqrt(len(curves)) if len(curves) > 1 else 0 * mean
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(1, n + 1)
    ax.plot(x, mean, color="tab:purple", label="mean true regret")
    ax.fill_between(x, mean - stderr, mean + stderr, alpha=0.3, color="tab:purple")
    ax.set_yscale("log")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("true regret")
    ax.legend()
    prov = f"gtbo regret plot; source={results_dir}; seeds={len(seed_dirs)}"
    return _save(fig, out, prov)


def _plot_active_count(results_dir: Path, out: Path, eta: float = 0.5) -> Path:
    seed_dirs = _seed_dirs(results_dir)
    padded, _ = _padded_marginals(seed_dirs)
    counts = (padded >= eta).sum(axis=2).mean(axis=0)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(np.arange(1, len(counts) + 1), counts, color="tab:orange")
    ax.set_xlabel("group test")
    ax.set_ylabel(f"mean #dimensions with marginal >= {eta}")
    prov = f"gtbo active-count plot; source={results_dir}; seeds={len(seed_dirs)}"
    return _save(fig, out, prov)


def _plot_sensitivity(results_dir: Path, out: Path) -> Path:
    sweep_path = results_dir / "sweep.csv"
    if not sweep_path.exists():
        raise FileNotFoundError(f"{sweep_path} not found; run the sweep first")
    with open(sweep_path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    axis = header[0]
    by_value: dict[str, dict[int, list[float]]] = {}
    for value, seed, it, pct in rows:
        by_value.setdefault(value, {}).setdefault(int(it), []).append(float(pct))
    fig, ax = plt.subplots(figsize=(7, 4))
    for value, per_iter in by_value.items():
        iters = sorted(per_iter)
        mean = [float(np.mean(per_iter[i])) for i in iters]
        ax.plot(iters, mean, label=f"{axis}={value}")
    ax.set_xlabel("group test")
    ax.set_ylabel("correctly classified dimensions [%]")
    ax.legend()
    prov = f"gtbo sensitivity plot; source={sweep_path}"
    return _save(fig, out, prov)


def render(results_dir: str | Path, kind: str) -> Path:
    """Render one figure kind into <results_dir>/<kind>.svg."""
    results_dir = Path(results_dir)
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}")
    if not results_dir.is_dir():
        raise FileNotFoundError(f"results directory {results_dir} does not exist")
    out = results_dir / f"{kind}.svg"
    if kind == "marginals":
        return _plot_marginals(results_dir, out)
    if kind == "regret":
        return _plot_regret(results_dir, out)
    if kind == "active_count":
        return _plot_active_count(results_dir, out)
    return _plot_sensitivity(results_dir, out)
