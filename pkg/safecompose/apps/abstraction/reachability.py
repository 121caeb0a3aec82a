"""
One-step reachable sets of a cell under a controller partition,
computed by natural interval extension of the nominal model
"""
from typing import Optional

import numpy as np

from safecompose.core.application import get_app_setting
from safecompose.core.geometry import Box
from safecompose.core.intervals import Interval, affine_feedback


def _box_of(obj) -> Box:
    return obj if isinstance(obj, Box) else obj.box


def input_range(cell, partition, input_dim: int) -> Interval:
    """Enclosure of ``u = K [x; 1]`` over ``x`` in the cell and ``K`` in the partition"""
    cell_box = _box_of(cell)
    gains_box = _box_of(partition)
    gains = Interval(gains_box.lo.reshape(input_dim, -1), gains_box.hi.reshape(input_dim, -1))
    return affine_feedback(gains, Interval.from_box(cell_box))


def post_overapprox(cell, partition, model, disturbance: Box, tolerance: Optional[float] = None) -> Box:
    """
    Box containing ``f(x, K [x; 1]) + d`` for every ``x`` in the cell,
    ``d`` in ``disturbance`` and ``K`` in the partition widened by the
    containment ``tolerance`` projected networks are certified to; rounded outward
    """
    if tolerance is None:
        tolerance = get_app_setting("policies", "containment_tolerance")
    cell_box = _box_of(cell)
    gains = _box_of(partition)
    gains = Box(gains.lo - tolerance, gains.hi + tolerance)
    u = input_range(cell_box, gains, model.input_dim)
    reach = model.step_interval(Interval.from_box(cell_box), u)
    inflated = (reach + Interval(disturbance.lo, disturbance.hi)).outward()
    return Box(inflated.lower, inflated.upper)


def next_states(partition, postbox: Box) -> np.ndarray:
    """Ids of every abstract state whose closed box meets ``postbox``"""
    return partition.overlapping(postbox)
