"""
Upper bound on how far the composed controller's reach probability can
fall below the optimal one, ``(H - k)(Delta_NN + Delta_opt)``
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from safecompose.apps.bounds.lipschitz import cell_lipschitz, gain_bound, kernel_cell, kernel_lipschitz
from safecompose.core.application import get_app_setting
from safecompose.utils.files import dump_json

logger = logging.getLogger(__name__)


@dataclass
class BoundConstants:
    state_dim: int
    input_dim: int
    #: grid diameter (Euclidean) and controller partition width (max-norm)
    delta_q: float
    delta_p: float
    #: bounds on ``||[x; 1]||`` over the safe set and on ``||K||`` over the controller box
    state_bound: float
    gain_bound: float
    cells: List[int] = field(default_factory=list)
    #: per safe cell: network constant L_i and kernel constants Lambda_i, Gamma_i
    network: List[float] = field(default_factory=list)
    state_kernel: List[float] = field(default_factory=list)
    input_kernel: List[float] = field(default_factory=list)
    variance_floor: float = 0.0
    floored_cells: List[int] = field(default_factory=list)
    quadrature_resolution: int = 0

    @property
    def safe_count(self) -> int:
        return len(self.cells)

    @property
    def feedback_factor(self) -> float:
        return float(np.sqrt(self.input_dim * (self.state_dim + 1)))

    def to_dict(self) -> dict:
        return {
            "safe_count": self.safe_count,
            "state_dim": self.state_dim,
            "input_dim": self.input_dim,
            "delta_q": self.delta_q,
            "delta_p": self.delta_p,
            "state_bound": self.state_bound,
            "gain_bound": self.gain_bound,
            "variance_floor": self.variance_floor,
            "floored_cells": list(self.floored_cells),
            "quadrature_resolution": self.quadrature_resolution,
            "cells": [
                {"q": q, "L": lip, "Lambda": lam, "Gamma": gam}
                for q, lip, lam, gam in zip(self.cells, self.network, self.state_kernel, self.input_kernel)
            ],
        }


@dataclass(frozen=True)
class OptimalityGap:
    nn_gap: float
    optimal_gap: float
    horizon: int

    def bound(self, k: int = 0) -> float:
        if not 0 <= k <= self.horizon:
            raise ValueError("step %d outside [0, %d]" % (k, self.horizon))
        return (self.horizon - k) * (self.nn_gap + self.optimal_gap)

    def to_dict(self) -> dict:
        return {
            "nn_gap": self.nn_gap,
            "optimal_gap": self.optimal_gap,
            "horizon": self.horizon,
            "bound": [self.bound(k) for k in range(self.horizon + 1)],
        }


def optimality_gap_bound(constants: BoundConstants, horizon: int) -> OptimalityGap:
    """
    ``Delta_NN = max_i(Lambda_i dq + Gamma_i L_i dq + c L_X Gamma_i dP)``;
    ``Delta_opt`` uses ``L_P`` for ``L_i`` and doubles the last term,
    with ``c = sqrt(m (n + 1))``
    """
    if not constants.cells:
        return OptimalityGap(0.0, 0.0, horizon)
    lam = np.asarray(constants.state_kernel)
    gam = np.asarray(constants.input_kernel)
    lip = np.asarray(constants.network)
    partition_term = constants.feedback_factor * constants.state_bound * gam * constants.delta_p
    nn_gap = np.max(lam * constants.delta_q + gam * lip * constants.delta_q + partition_term)
    optimal_gap = np.max(
        lam * constants.delta_q + gam * constants.gain_bound * constants.delta_q + 2.0 * partition_term
    )
    return OptimalityGap(float(nn_gap), float(optimal_gap), horizon)


def state_bound(partition, cells) -> float:
    """Largest ``||[x; 1]||`` over the given cells"""
    if len(cells) == 0:
        return 0.0
    lowers = np.abs(partition.lowers[cells])
    uppers = np.abs(partition.uppers[cells])
    return float(np.sqrt(np.max(np.sum(np.maximum(lowers, uppers) ** 2, axis=1)) + 1.0))


def compute_bound_constants(
    mdp,
    selection,
    store,
    model,
    gp,
    *,
    resolution: Optional[int] = None,
    variance_floor: Optional[float] = None,
) -> BoundConstants:
    if resolution is None:
        resolution = get_app_setting("bounds", "quadrature_resolution")
    if variance_floor is None:
        variance_floor = get_app_setting("bounds", "variance_floor")
    partition = mdp.partition
    cells = [int(q) for q in selection.safe.safe_ids]
    safe_boxes = [partition.cell_box(q) for q in cells]
    constants = BoundConstants(
        state_dim=mdp.state_dim,
        input_dim=mdp.input_dim,
        delta_q=partition.diameter,
        delta_p=mdp.controller_grid.max_width,
        state_bound=state_bound(partition, cells),
        gain_bound=gain_bound(mdp.controller_grid),
        variance_floor=variance_floor,
        quadrature_resolution=2 * resolution,
    )
    for q in cells:
        kernel = kernel_cell(mdp, q, model, gp, variance_floor)
        lam, gam = kernel_lipschitz(kernel, safe_boxes, resolution)
        constants.cells.append(q)
        constants.network.append(cell_lipschitz(store, mdp, q))
        constants.state_kernel.append(lam)
        constants.input_kernel.append(gam)
        if kernel.floored:
            constants.floored_cells.append(q)
    logger.info(
        "bound constants over %d safe cells: max Lambda %.3g, max Gamma %.3g, max L %.3g",
        len(cells),
        max(constants.state_kernel, default=0.0),
        max(constants.input_kernel, default=0.0),
        max(constants.network, default=0.0),
    )
    return constants


def dump_bound_report(path: Union[str, Path], constants: BoundConstants, gap: OptimalityGap):
    dump_json(path, {"constants": constants.to_dict(), "gap": gap.to_dict()})
