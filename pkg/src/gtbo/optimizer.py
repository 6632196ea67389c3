"""BO phase: prior-guided GP plus log noisy expected improvement.

Initializes from the group-testing history (after merging points that
coincide on the active dimensions), then iterates fit / propose / evaluate.
The acquisition is the numerically stable log of expected improvement over
the noisy incumbent, defined as the minimum posterior mean over observed
inputs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import erf, erfcx, log_ndtr
from scipy.stats import qmc

from gtbo.engine import GTResult
from gtbo.gp import GPModel, LengthscalePriors, fit

__all__ = [
    "BOConfig",
    "BOTrace",
    "dedupe",
    "log_ei_h",
    "log_noisy_ei",
    "propose",
    "run_bo",
    "random_search",
]

logger = logging.getLogger(__name__)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
ACQ_FLOOR = -1e10


@dataclass(frozen=True)
class BOConfig:
    """Settings for the BO phase."""

    budget: int = 100
    dedupe_tol: float = 1e-6
    n_candidates: int = 512
    n_refine: int = 10
    priors: LengthscalePriors = field(default_factory=LengthscalePriors)
    fit_starts: int = 8
    refit_starts: int = 2
    fit_max_iter: int = 80
    refit_max_iter: int = 40


@dataclass
class BOTrace:
    """Ordered evaluations, group-testing data included."""

    points: list[np.ndarray]
    ys: list[float]
    n_gt: int  # leading entries that came from the group-testing phase

    @property
    def best_ys(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.ys))


def dedupe(
    points: np.ndarray, ys: np.ndarray, active_idx: list[int], tol: float = 1e-6
) -> tuple[np.ndarray, np.ndarray]:
    """Merge points that coincide on the active dimensions.

    Points whose active coordinates differ by less than tol in max-norm are
    represented by the first of them, with the mean of their observations
    as target. Differences on inactive coordinates are ignored.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ys = np.asarray(ys, dtype=float)
    proj = points[:, active_idx] if active_idx else np.zeros((len(points), 0))
    reps: list[int] = []
    groups: list[list[int]] = []
    for i in range(len(points)):
        for gi, rep in enumerate(reps):
            if proj.shape[1] == 0 or np.max(np.abs(proj[i] - proj[rep])) < tol:
                groups[gi].append(i)
                break
        else:
            reps.append(i)
            groups.append([i])
    X = points[reps]
    y = np.array([float(np.mean(ys[g])) for g in groups])
    return X, y


def log_ei_h(u: np.ndarray) -> np.ndarray:
    """log(phi(u) + u * Phi(u)), stable far into the negative tail."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    log_phi = -0.5 * u * u - _LOG_SQRT_2PI

    direct = u > -1.0
    if np.any(direct):
        ud = u[direct]
        phi = np.exp(-0.5 * ud * ud) / math.sqrt(2.0 * math.pi)
        Phi = 0.5 * (1.0 + erf(ud / math.sqrt(2.0)))
        out[direct] = np.log(phi + ud * Phi)

    mid = (~direct) & (u > -30.0)
    if np.any(mid):
        um = u[mid]
        # u * Phi(u) / phi(u) = u * sqrt(pi/2) * erfcx(-u / sqrt(2)) in (-1, 0)
        ratio = um * math.sqrt(math.pi / 2.0) * erfcx(-um / math.sqrt(2.0))
        out[mid] = log_phi[mid] + np.log1p(ratio)

    tail = u <= -30.0
    if np.any(tail):
        ut = u[tail]
        inv2 = 1.0 / (ut * ut)
        out[tail] = log_phi[tail] + np.log(inv2 * (1.0 - 3.0 * inv2 + 15.0 * inv2 * inv2))
    return out


def _incumbent(gp: GPModel) -> float:
    """Noisy-EI incumbent: minimum posterior mean over the training inputs."""
    mean, _ = gp.posterior(gp.X)
    return float(np.min(mean))


def log_noisy_ei(gp: GPModel, x: np.ndarray, incumbent: float | None = None) -> float:
    """Log expected improvement below the noisy incumbent at one point."""
    if incumbent is None:
        incumbent = _incumbent(gp)
    mean, var = gp.posterior(np.atleast_2d(x))
    return float(_log_ei_values(mean, var, incumbent)[0])


def _log_ei_values(mean: np.ndarray, var: np.ndarray, incumbent: float) -> np.ndarray:
    sigma = np.sqrt(np.maximum(var, 0.0))
    ok = sigma > 1e-15
    out = np.full(mean.shape, ACQ_FLOOR)
    if np.any(ok):
        u = (incumbent - mean[ok]) / sigma[ok]
        out[ok] = np.maximum(np.log(sigma[ok]) + log_ei_h(u), ACQ_FLOOR)
    return out


def _neg_log_ei_and_grad(gp: GPModel, x: np.ndarray, incumbent: float):
    mean, var, dmean, dvar = gp.posterior_with_grad(x)
    sigma = math.sqrt(max(var, 0.0))
    if sigma <= 1e-15:
        return -ACQ_FLOOR, np.zeros_like(x)
    u = (incumbent - mean) / sigma
    logh = float(log_ei_h(np.array([u]))[0])
    value = math.log(sigma) + logh
    if value < ACQ_FLOOR:
        return -ACQ_FLOOR, np.zeros_like(x)
    dsigma = dvar / (2.0 * sigma)
    log_phi = -0.5 * u * u - _LOG_SQRT_2PI
    r_Phi = math.exp(float(log_ndtr(u)) - logh)
    r_phi = math.exp(log_phi - logh)
    grad = (-r_Phi * dmean + r_phi * dsigma) / sigma
    return -value, -grad


def propose(
    gp: GPModel,
    rng: np.random.Generator,
    n_candidates: int = 512,
    n_refine: int = 10,
    dedupe_tol: float = 1e-6,
) -> np.ndarray:
    """Maximize the acquisition: quasi-random scoring plus gradient refinement.

    The best refined candidate is returned, clipped to the unit cube; any
    candidate whose active-dimension projection duplicates a training point
    within dedupe_tol is skipped.
    """
    D = gp.X.shape[1]
    incumbent = _incumbent(gp)
    sobol = qmc.Sobol(d=D, scramble=True, seed=int(rng.integers(2**31)))
    cands = sobol.random(n_candidates)
    mean, var = gp.posterior(cands)
    scores = _log_ei_values(mean, var, incumbent)
    top = np.argsort(scores)[::-1][:n_refine]

    refined: list[tuple[float, np.ndarray]] = []
    for idx in top:
        res = minimize(
            lambda x: _neg_log_ei_and_grad(gp, x, incumbent),
            cands[idx],
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * D,
            options={"maxiter": 50},
        )
        refined.append((-float(res.fun), np.clip(res.x, 0.0, 1.0)))
    refined.sort(key=lambda t: -t[0])

    active = np.nonzero(gp.active_mask)[0]
    train_proj = gp.X[:, active]
    for _, x in refined:
        proj = x[active]
        if train_proj.shape[1] == 0 or np.all(
            np.max(np.abs(train_proj - proj[None, :]), axis=1) >= dedupe_tol
        ):
            return x
    # Every refined candidate collided with existing data; fall back to a
    # random point, which is almost surely distinct.
    logger.warning("all refined acquisition candidates duplicated training data")
    return rng.random(D)


def run_bo(
    f,
    gt: GTResult,
    budget: int,
    rng: np.random.Generator,
    config: BOConfig | None = None,
) -> BOTrace:
    """BO loop seeded with the (deduplicated) group-testing evaluations."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    config = config or BOConfig(budget=budget)
    D = len(gt.x_def)
    active_idx = list(gt.active_set)
    if not active_idx:
        logger.warning(
            "empty active set from group testing; treating all dimensions as active"
        )
        active_idx = list(range(D))
    active_mask = np.zeros(D, dtype=bool)
    active_mask[active_idx] = True

    gt_points = [p for p, _ in gt.evaluations]
    gt_ys = [y for _, y in gt.evaluations]
    trace = BOTrace(points=list(gt_points), ys=list(gt_ys), n_gt=len(gt_ys))

    X, y = dedupe(np.array(gt_points), np.array(gt_ys), active_idx, config.dedupe_tol)
    warm = None
    for it in range(budget):
        gp = fit(
            X,
            y,
            active_mask,
            config.priors,
            rng,
            n_starts=config.fit_starts if warm is None else config.refit_starts,
            warm_start=warm,
            max_iter=config.fit_max_iter if warm is None else config.refit_max_iter,
        )
        warm = gp.theta
        x_next = propose(
            gp,
            rng,
            n_candidates=config.n_candidates,
            n_refine=config.n_refine,
            dedupe_tol=config.dedupe_tol,
        )
        y_next = float(f(x_next))
        trace.points.append(x_next)
        trace.ys.append(y_next)
        X = np.vstack([X, x_next])
        y = np.append(y, y_next)
    return trace


def random_search(f, D: int, budget: int, rng: np.random.Generator) -> BOTrace:
    """Uniform random baseline over the unit cube."""
    trace = BOTrace(points=[], ys=[], n_gt=0)
    for _ in range(budget):
        x = rng.random(D)
        trace.points.append(x)
        trace.ys.append(float(f(x)))
    return trace
