"""
Finite-horizon dynamic programming for the maximal probability of
reaching the goal through safe partitions
"""
import logging
from dataclasses import dataclass
from typing import Optional, Set

import numpy as np

from safecompose.apps.policies.store import LocalPolicyKey

logger = logging.getLogger(__name__)

NO_ASSIGNMENT = -1


@dataclass
class ValueTable:
    """``values[k, q]`` for ``k = 0..H``"""

    values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    def at(self, k: int) -> np.ndarray:
        return self.values[k]

    def __getitem__(self, item):
        return self.values[item]


@dataclass
class ActivationMap:
    """
    Time-varying assignment of a transition to every safe non-goal cell;
    ``partitions[k, q]`` and ``targets[k, q]`` are ``-1`` where nothing
    is assigned
    """

    partitions: np.ndarray
    targets: np.ndarray

    @property
    def horizon(self) -> int:
        return self.partitions.shape[0]

    def key_for(self, k: int, q: Optional[int]) -> Optional[LocalPolicyKey]:
        if q is None or not 0 <= k < self.horizon:
            return None
        p = int(self.partitions[k, q])
        if p == NO_ASSIGNMENT:
            return None
        return LocalPolicyKey(int(q), p, int(self.targets[k, q]))

    def keys(self, steps=None) -> Set[LocalPolicyKey]:
        steps = range(self.horizon) if steps is None else steps
        found = set()
        for k in steps:
            for q in np.flatnonzero(self.partitions[k] != NO_ASSIGNMENT):
                found.add(self.key_for(k, int(q)))
        return found

    def to_dict(self) -> dict:
        return {
            str(k): {
                str(int(q)): self.key_for(k, int(q)).to_list()
                for q in np.flatnonzero(self.partitions[k] != NO_ASSIGNMENT)
            }
            for k in range(self.horizon)
        }


def action_values(mdp, safe, next_values: np.ndarray) -> np.ndarray:
    """``(N, M)`` expected next value over the safe successors"""
    rows = mdp.num_states * mdp.num_actions
    row_of_entry = np.repeat(np.arange(rows), np.diff(mdp.offsets))
    weights = mdp.probabilities * np.where(safe[mdp.targets], next_values[mdp.targets], 0.0)
    return np.bincount(row_of_entry, weights=weights, minlength=rows).reshape(
        mdp.num_states, mdp.num_actions
    )


def best_target(mdp, q: int, p: int, safe: np.ndarray) -> int:
    """Most likely safe successor, lowest id on ties"""
    targets, probabilities = mdp.row(q, p)
    keep = safe[targets]
    if not keep.any():
        return NO_ASSIGNMENT
    targets, probabilities = targets[keep], probabilities[keep]
    return int(targets[int(np.argmax(probabilities))])


def dp_liveness(mdp, safe_sets, goal: np.ndarray, horizon: int):
    """
    Backward recursion from ``V_H = 1`` on safe goal cells; returns the
    activation map and the value table
    """
    safe = safe_sets.safe
    goal = goal & safe
    n_states = mdp.num_states
    values = np.zeros((horizon + 1, n_states))
    values[horizon] = goal.astype(float)
    partitions = np.full((horizon, n_states), NO_ASSIGNMENT, dtype=np.int64)
    targets = np.full((horizon, n_states), NO_ASSIGNMENT, dtype=np.int64)
    choosing = safe & ~goal

    for k in range(horizon - 1, -1, -1):
        q_values = np.where(safe_sets.partitions, action_values(mdp, safe, values[k + 1]), -np.inf)
        best = np.argmax(q_values, axis=1)
        best_value = q_values[np.arange(n_states), best]
        values[k] = np.where(goal, 1.0, np.where(choosing & np.isfinite(best_value), best_value, 0.0))
        for q in np.flatnonzero(choosing & np.isfinite(best_value)):
            partitions[k, q] = best[q]
            targets[k, q] = best_target(mdp, int(q), int(best[q]), safe)

    logger.info(
        "liveness over %d steps: best value %.4f from %d safe cells",
        horizon,
        float(values[0].max()) if n_states else 0.0,
        int(safe.sum()),
    )
    return ActivationMap(partitions, targets), ValueTable(values)
