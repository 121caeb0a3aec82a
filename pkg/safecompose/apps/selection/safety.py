"""
Safety backtracking: remove cells from which no admissible partition
avoids the unsafe set, until nothing changes
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from safecompose.apps.selection.reach_avoid import mark_states

logger = logging.getLogger(__name__)


def _row_index(mdp) -> np.ndarray:
    rows = mdp.num_states * mdp.num_actions
    return np.repeat(np.arange(rows), np.diff(mdp.offsets))


def reaches(mdp, mask: np.ndarray) -> np.ndarray:
    """``(N, M)`` flags: does ``Next(q, P)`` meet the cells in ``mask``"""
    rows = mdp.num_states * mdp.num_actions
    hits = np.bincount(_row_index(mdp), weights=mask[mdp.targets].astype(float), minlength=rows)
    return (hits > 0).reshape(mdp.num_states, mdp.num_actions)


def admissible(mdp) -> np.ndarray:
    """``(N, M)`` flags: is ``Next(q, P)`` nonempty"""
    return (np.diff(mdp.offsets) > 0).reshape(mdp.num_states, mdp.num_actions)


@dataclass
class SafeSets:
    safe: np.ndarray
    partitions: np.ndarray
    obstacles: np.ndarray
    goal: np.ndarray
    #: size of the unsafe set after every backtracking pass
    history: List[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def is_empty(self) -> bool:
        return not self.safe.any()

    @property
    def safe_ids(self) -> np.ndarray:
        return np.flatnonzero(self.safe)

    @property
    def unsafe(self) -> np.ndarray:
        return ~self.safe

    def p_safe(self, q: int) -> np.ndarray:
        return np.flatnonzero(self.partitions[q])

    def contains(self, partition, x) -> bool:
        """Is ``x`` in ``X_init``, the union of the safe cells"""
        cell = partition.locate(x)
        return cell is not None and bool(self.safe[cell])

    def to_dict(self) -> dict:
        return {
            "safe": self.safe_ids.tolist(),
            "p_safe": {int(q): self.p_safe(q).tolist() for q in self.safe_ids},
            "obstacles": np.flatnonzero(self.obstacles).tolist(),
            "goal": np.flatnonzero(self.goal).tolist(),
            "history": list(self.history),
        }


def backtrack_safety(mdp, task, marks: Optional[tuple] = None) -> SafeSets:
    """
    Fixed point of the unsafe set starting from the obstacle cells

    A non-goal cell turns unsafe when every partition is inadmissible or
    can reach an unsafe cell; goal cells are unsafe only when they touch
    an obstacle.
    """
    obstacles, goal = marks if marks is not None else mark_states(mdp.partition, task)
    allowed = admissible(mdp)
    unsafe = obstacles.copy()
    history = [int(unsafe.sum())]
    while True:
        keeps = allowed & ~reaches(mdp, unsafe)
        grown = unsafe | (~goal & ~keeps.any(axis=1))
        if np.array_equal(grown, unsafe):
            break
        unsafe = grown
        history.append(int(unsafe.sum()))
    safe = ~unsafe
    partitions = allowed & ~reaches(mdp, unsafe) & safe[:, None]
    sets = SafeSets(safe, partitions, obstacles, goal, history)
    if sets.is_empty:
        logger.warning("task %s: no safe initial states", getattr(task, "name", "?"))
    else:
        logger.info(
            "task %s: %d of %d cells safe after %d passes",
            getattr(task, "name", "?"),
            int(safe.sum()),
            len(safe),
            sets.iterations,
        )
    return sets
