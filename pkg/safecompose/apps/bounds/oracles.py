"""
Fine-grid dynamic programming for the continuous optimal value and the
value of the composed controller on small instances

Each coarse cell is split into ``refinement`` fine cells per axis. A
fine cell takes the value of its center; the kernel mass of every fine
cell is integrated exactly. The optimal recursion maximises over
``levels`` evenly spaced inputs per axis of every safe partition's input
range at the fine-cell center, plus the composed controller's input.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from safecompose.apps.abstraction.kernels import interval_mass
from safecompose.apps.abstraction.partitions import StatePartition
from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import ResolutionError

logger = logging.getLogger(__name__)

MAX_ORACLE_DIM = 2


@dataclass
class OracleValues:
    fine: StatePartition
    #: coarse cell of every fine cell
    coarse_ids: np.ndarray
    safe: np.ndarray
    #: ``(H + 1, fine cells)`` value tables
    optimal: np.ndarray
    nn: np.ndarray

    def gap(self, k: int = 0) -> float:
        """``max |V_NN - V*|`` over the safe fine cells"""
        if not self.safe.any():
            return 0.0
        return float(np.max(np.abs(self.nn[k, self.safe] - self.optimal[k, self.safe])))

    def coarsen(self, values, factor: int) -> np.ndarray:
        """Block averages of a fine value table over ``factor`` cells per axis"""
        shape = self.fine.counts
        grid = np.asarray(values).reshape(shape, order="F")
        blocks = []
        for count in shape:
            blocks.extend([factor, count // factor])
        grid = grid.reshape(blocks, order="F")
        return grid.mean(axis=tuple(range(0, 2 * len(shape), 2))).ravel(order="F")


def fine_partition(partition, refinement: int, max_cells: Optional[int] = None):
    """Refined grid and the coarse id of every fine cell"""
    if max_cells is None:
        max_cells = get_app_setting("bounds", "oracle_max_cells")
    if partition.dim > MAX_ORACLE_DIM:
        raise ResolutionError(
            "value oracles handle at most %d state dimensions, got %d" % (MAX_ORACLE_DIM, partition.dim)
        )
    if partition.periodic_dims:
        raise ResolutionError("value oracles need a grid without periodic axes")
    if refinement < 1:
        raise ResolutionError("refinement must be at least 1, got %d" % refinement)
    counts = tuple(c * refinement for c in partition.counts)
    size = int(np.prod(counts))
    if size > max_cells:
        raise ResolutionError(
            "fine grid %s has %d cells, more than the %d allowed" % ("x".join(map(str, counts)), size, max_cells)
        )
    fine = StatePartition(partition.domain, counts)
    index = np.unravel_index(np.arange(size), counts, order="F")
    coarse = np.ravel_multi_index(
        tuple(i // refinement for i in index), partition.counts, order="F"
    )
    return fine, coarse


def _input_levels(centers, box, input_dim: int, levels: int) -> np.ndarray:
    """``(cells, levels^m, m)`` inputs spanning ``K [x; 1]`` for ``K`` in ``box``"""
    lo = box.lo.reshape(input_dim, -1)
    hi = box.hi.reshape(input_dim, -1)
    augmented = np.hstack([centers, np.ones((len(centers), 1))])
    products_lo = np.minimum(augmented[:, None, :] * lo, augmented[:, None, :] * hi)
    products_hi = np.maximum(augmented[:, None, :] * lo, augmented[:, None, :] * hi)
    u_lo = products_lo.sum(axis=2)
    u_hi = products_hi.sum(axis=2)
    steps = np.linspace(0.0, 1.0, levels)
    grids = np.meshgrid(*[steps] * input_dim, indexing="ij")
    fractions = np.stack([g.ravel() for g in grids], axis=1)
    return u_lo[:, None, :] + fractions[None, :, :] * (u_hi - u_lo)[:, None, :]


class _Kernel:
    """Expected next value under the Gaussian kernel restricted to the fine grid"""

    def __init__(self, fine, model, gp, variance_floor):
        self.fine = fine
        self.model = model
        self.gp = gp
        self.variance_floor = variance_floor

    def expected(self, values, x, u) -> np.ndarray:
        mean = self.model.evaluate(x, u)
        if self.gp is not None:
            gp_mean, variance = self.gp.predict(np.hstack([x, u]))
            mean = mean + gp_mean
        else:
            variance = np.zeros_like(mean)
        std = np.sqrt(np.maximum(variance, self.variance_floor))
        masses = []
        for axis, edges in enumerate(self.fine.edges):
            m = mean[:, [axis]]
            s = std[:, [axis]]
            masses.append(interval_mass((edges[:-1] - m) / s, (edges[1:] - m) / s))
        grid = values.reshape(self.fine.counts, order="F")
        if len(masses) == 1:
            return np.einsum("bi,i->b", masses[0], grid)
        return np.einsum("bi,ij,bj->b", masses[0], grid, masses[1])


def oracle_values(
    mdp,
    selection,
    store,
    model,
    gp,
    refinement: int,
    *,
    levels: Optional[int] = None,
    variance_floor: Optional[float] = None,
    max_cells: Optional[int] = None,
) -> OracleValues:
    """
    Backward recursions for ``V*`` and ``V_NN`` from ``V_H = 1_goal``;
    values vanish outside the safe set
    """
    if levels is None:
        levels = get_app_setting("bounds", "oracle_control_levels")
    if variance_floor is None:
        variance_floor = get_app_setting("bounds", "variance_floor")
    fine, coarse = fine_partition(mdp.partition, refinement, max_cells)
    sets = selection.safe
    activation = selection.activation
    horizon = selection.task.horizon
    safe = sets.safe[coarse]
    goal = safe & sets.goal[coarse]
    live = np.flatnonzero(safe & ~goal)
    centers = fine.centers[live]
    kernel = _Kernel(fine, model, gp, variance_floor)

    candidates = []
    for p, partition in enumerate(mdp.controller_grid.partitions):
        allowed = sets.partitions[coarse[live], p]
        inputs = _input_levels(centers, partition.box, mdp.input_dim, levels)
        candidates.append((allowed, inputs))

    optimal = np.zeros((horizon + 1, len(fine)))
    nn = np.zeros((horizon + 1, len(fine)))
    optimal[:, goal] = 1.0
    nn[:, goal] = 1.0
    for k in range(horizon - 1, -1, -1):
        nn_inputs, assigned = _composed_inputs(activation, store, k, coarse[live], centers, mdp.input_dim)
        if assigned.any():
            nn[k, live[assigned]] = kernel.expected(
                nn[k + 1], centers[assigned], nn_inputs[assigned]
            )
        best = np.zeros(len(live))
        if assigned.any():
            best[assigned] = kernel.expected(optimal[k + 1], centers[assigned], nn_inputs[assigned])
        for allowed, inputs in candidates:
            rows = np.flatnonzero(allowed)
            if rows.size == 0:
                continue
            for level in range(inputs.shape[1]):
                value = kernel.expected(optimal[k + 1], centers[rows], inputs[rows, level])
                best[rows] = np.maximum(best[rows], value)
        optimal[k, live] = best

    logger.info(
        "value oracles on %d fine cells, horizon %d: max gap %.3e",
        len(fine),
        horizon,
        float(np.max(np.abs(nn[0] - optimal[0]), initial=0.0)),
    )
    return OracleValues(fine, coarse, safe, optimal, nn)


def _composed_inputs(activation, store, k, cells, centers, input_dim):
    inputs = np.zeros((len(cells), input_dim))
    assigned = np.zeros(len(cells), dtype=bool)
    for index, (q, x) in enumerate(zip(cells, centers)):
        key = activation.key_for(k, int(q))
        if key is None:
            continue
        inputs[index] = store[key](x)
        assigned[index] = True
    return inputs, assigned
