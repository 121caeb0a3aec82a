import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from safecompose.apps.selection.liveness import ActivationMap, ValueTable, dp_liveness
from safecompose.apps.selection.reach_avoid import Task
from safecompose.apps.selection.safety import SafeSets, backtrack_safety
from safecompose.core.exceptions import MissingPolicyError
from safecompose.utils.files import dump_json

logger = logging.getLogger(__name__)


@dataclass
class SelectionResult:
    task: Task
    safe: SafeSets
    activation: ActivationMap
    values: ValueTable
    seconds: float = 0.0

    @property
    def is_empty(self) -> bool:
        return self.safe.is_empty

    def missing_keys(self, store) -> list:
        """Keys the activation map needs but ``store`` lacks, in id order"""
        return sorted(k for k in self.activation.keys() if k not in store)

    def to_dict(self) -> dict:
        return {
            "task": self.task.to_dict(),
            "x_init": self.safe.safe_ids.tolist(),
            "activation": self.activation.to_dict(),
            "values": {
                str(int(q)): float(self.values[0, q]) for q in self.safe.safe_ids
            },
            "safe_sets": self.safe.to_dict(),
            "assign_seconds": self.seconds,
        }

    def dump(self, path: Union[str, Path]):
        dump_json(path, self.to_dict())


def select(task: Task, mdp, store=None) -> SelectionResult:
    """
    Safety backtracking followed by the liveness recursion; with a
    ``store`` the keys it lacks are logged as the transfer work list
    """
    started = time.perf_counter()
    safe = backtrack_safety(mdp, task)
    if safe.is_empty:
        horizon = task.horizon
        empty = np.full((horizon, mdp.num_states), -1, dtype=np.int64)
        result = SelectionResult(
            task,
            safe,
            ActivationMap(empty, empty.copy()),
            ValueTable(np.zeros((horizon + 1, mdp.num_states))),
        )
    else:
        activation, values = dp_liveness(mdp, safe, safe.goal, task.horizon)
        result = SelectionResult(task, safe, activation, values)
    result.seconds = time.perf_counter() - started
    if store is not None:
        missing = result.missing_keys(store)
        if missing:
            logger.info("task %s: %d activated transitions lack a network", task.name, len(missing))
    return result


class ComposedController:
    """
    ``u = NN_{Gamma_k(x)}(x)``: the network assigned to the current cell
    at step ``k``
    """

    def __init__(self, selection: SelectionResult, partition, store):
        self.selection = selection
        self.partition = partition
        self.store = store

    def key_at(self, x, k: int):
        return self.selection.activation.key_for(k, self.partition.locate(x))

    def __call__(self, x, k: int) -> np.ndarray:
        key = self.key_at(x, k)
        if key is None:
            raise MissingPolicyError("no transition assigned at step %d to %s" % (k, np.asarray(x)))
        return self.store[key](x)

    def missing(self) -> List:
        return self.selection.missing_keys(self.store)


def safe_initial_samples(selection: SelectionResult, partition, rng, count: int, goal_free=True):
    """
    Uniform samples from ``X_init``: a safe cell drawn with probability
    proportional to its volume, then a point inside it
    """
    cells = selection.safe.safe_ids
    if goal_free:
        cells = cells[~selection.safe.goal[cells]]
    if len(cells) == 0 or count == 0:
        return np.zeros((0, partition.dim))
    volumes = np.array([partition.cell_box(int(q)).volume for q in cells])
    chosen = rng.choice(cells, size=count, p=volumes / volumes.sum())
    return np.array([partition.cell_box(int(q)).sample(rng, 1)[0] for q in chosen])
