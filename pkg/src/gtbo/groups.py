"""Greedy construction of maximally informative test groups.

The next group is found by multi-start forward-backward local search over
binary masks, maximizing the mutual information between the activity state
and the test observation. Batches are built by rerunning the search with
already selected groups excluded, until the MI of new groups drops below a
fraction of the first group's MI.
"""

from __future__ import annotations

import numpy as np

from gtbo.information import MiEvaluator

__all__ = ["forward_backward", "select_batch", "make_starts"]


def make_starts(ps, rng: np.random.Generator, n_starts: int = 3) -> list[np.ndarray]:
    """Initial masks: one empty, plus prior samples and posterior particles."""
    if n_starts < 1:
        raise ValueError("need at least one start")
    starts = [np.zeros(ps.D, dtype=np.int8)]
    for j in range(1, n_starts):
        if j % 2 == 1:
            starts.append((rng.random(ps.D) < ps.prior_q).astype(np.int8))
        else:
            idx = rng.choice(ps.M, p=ps.weights)
            starts.append(ps.particles[idx].copy())
    return starts


def _candidate_key(mask: np.ndarray, mi: float) -> tuple:
    """Sort key: highest MI, then smallest group, then lowest member indices."""
    members = tuple(int(i) for i in np.nonzero(mask)[0])
    return (-mi, len(members), members)


class _GreedyState:
    """One candidate mask with incrementally maintained per-particle hit counts."""

    def __init__(self, ps, mi_eval: MiEvaluator, mask: np.ndarray):
        self.particles = ps.particles
        self.weights = ps.weights
        self.mi_eval = mi_eval
        self.mask = mask.astype(np.int8).copy()
        self.counts = (self.particles @ self.mask).astype(np.int32)
        self.mi = float(mi_eval.mi(self._p_current()))

    def _p_current(self) -> float:
        return float(np.sum(self.weights[self.counts >= 1]))

    def _add(self, i: int):
        self.mask[i] = 1
        self.counts += self.particles[:, i]

    def _remove(self, i: int):
        self.mask[i] = 0
        self.counts -= self.particles[:, i]

    def forward_phase(self) -> bool:
        """Greedily add the dimension with the largest strict MI increase."""
        changed = False
        while True:
            no_hit = self.counts == 0
            p_base = 1.0 - float(np.sum(self.weights[no_hit]))
            p_add = p_base + (self.weights * no_hit) @ self.particles
            mi_add = np.asarray(self.mi_eval.mi(p_add))
            mi_add[self.mask == 1] = -np.inf
            best = int(np.argmax(mi_add))
            if mi_add[best] > self.mi:
                self._add(best)
                self.mi = float(mi_add[best])
                changed = True
            else:
                break
        return changed

    def force_nonempty(self):
        """Guarantee a non-empty mask after the forward phase."""
        if not self.mask.any():
            p_add = self.weights @ self.particles
            mi_add = np.asarray(self.mi_eval.mi(p_add))
            best = int(np.argmax(mi_add))
            self._add(best)
            self.mi = float(mi_add[best])

    def backward_phase(self) -> bool:
        """Greedily drop the member whose removal best preserves or raises MI.

        Removal is accepted on ties so redundant members (zero marginal mass
        given the rest of the group) are stripped; the group never empties.
        """
        changed = False
        while True:
            members = np.nonzero(self.mask)[0]
            if members.size <= 1:
                break
            best_i = -1
            best_mi = -np.inf
            for i in members:
                hit_without = (self.counts - self.particles[:, i]) >= 1
                p_rem = float(np.sum(self.weights[hit_without]))
                mi_rem = float(self.mi_eval.mi(p_rem))
                if mi_rem > best_mi:
                    best_mi = mi_rem
                    best_i = int(i)
            if best_mi >= self.mi:
                self._remove(best_i)
                self.mi = best_mi
                changed = True
            else:
                break
        return changed


def forward_backward(
    ps,
    mi_eval: MiEvaluator,
    starts: list[np.ndarray],
    excluded: set[bytes] | None = None,
) -> tuple[np.ndarray, float] | None:
    """Run forward-backward search from every start; return the best group.

    Candidates that land exactly on an excluded mask are discarded. Returns
    (mask, mi) of the winner, or None if every start was excluded.
    """
    if not starts:
        raise ValueError("at least one start is required")
    excluded = excluded or set()
    best: tuple[tuple, np.ndarray, float] | None = None
    for start in starts:
        state = _GreedyState(ps, mi_eval, start)
        state.forward_phase()
        state.force_nonempty()
        state.backward_phase()
        # Alternate phases until a full pass leaves the mask unchanged.
        while True:
            changed = state.forward_phase()
            changed |= state.backward_phase()
            if not changed:
                break
        if state.mask.tobytes() in excluded:
            continue
        key = _candidate_key(state.mask, state.mi)
        if best is None or key < best[0]:
            best = (key, state.mask.copy(), state.mi)
    if best is None:
        return None
    return best[1], best[2]


def select_batch(
    ps,
    nm,
    rng: np.random.Generator,
    max_batch: int = 5,
    mi_drop: float = 0.01,
    n_starts: int = 3,
    mi_samples: int = 2048,
) -> list[np.ndarray]:
    """Select up to max_batch mutually distinct groups for one test batch.

    The first group maximizes MI outright; later groups rerun the search
    with earlier selections excluded and are kept while their MI stays
    above (1 - mi_drop) times the first group's MI.
    """
    if max_batch < 1:
        raise ValueError("max_batch must be positive")
    if not 0.0 < mi_drop <= 1.0:
        raise ValueError("mi_drop must lie in (0, 1]")
    mi_eval = MiEvaluator(nm, mi_samples, rng)
    selected: list[np.ndarray] = []
    excluded: set[bytes] = set()
    first_mi = None
    while len(selected) < max_batch:
        result = forward_backward(ps, mi_eval, make_starts(ps, rng, n_starts), excluded)
        if result is None:
            break
        mask, mi = result
        if first_mi is None:
            first_mi = mi
        elif mi < (1.0 - mi_drop) * first_mi:
            break
        selected.append(mask)
        excluded.add(mask.tobytes())
    return selected
