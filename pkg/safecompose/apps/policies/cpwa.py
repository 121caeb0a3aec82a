"""
Exact piecewise-affine form of a shallow ReLU network over a box

Neurons whose pre-activation keeps its sign over the box are fixed;
activation patterns of the remaining neurons are enumerated depth-first
and kept when the region they carve out of the box has an interior,
which a linear program certifies.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import RegionEnumerationError
from safecompose.core.geometry import Box

logger = logging.getLogger(__name__)

#: minimum slack (distance to every active hyperplane) of a region witness
INTERIOR_SLACK = 1e-9


@dataclass(frozen=True)
class AffineRegion:
    pattern: Tuple[bool, ...]
    gain: np.ndarray
    offset: np.ndarray
    witness: np.ndarray

    def combined(self) -> np.ndarray:
        """``[K | b]`` of shape ``m x (n + 1)``"""
        return np.hstack([self.gain, self.offset[:, None]])


@dataclass
class CPWAFunction:
    box: Box
    regions: List[AffineRegion]
    crossing: Tuple[int, ...] = ()
    _index: Dict[Tuple[bool, ...], AffineRegion] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {self._key(r.pattern): r for r in self.regions}

    def __len__(self):
        return len(self.regions)

    def _key(self, pattern) -> Tuple[bool, ...]:
        return tuple(bool(pattern[i]) for i in self.crossing)

    def region_at(self, x, pre_activation) -> AffineRegion:
        key = self._key(pre_activation > 0)
        region = self._index.get(key)
        if region is not None:
            return region
        # x sits on a region boundary; any adjacent region gives the same value
        mismatches = [sum(a != b for a, b in zip(key, k)) for k in self._index]
        return self.regions[int(np.argmin(mismatches))]

    def evaluate(self, net, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        region = self.region_at(x, net.pre_activation(x))
        return region.gain @ x + region.offset

    def combined_gains(self) -> np.ndarray:
        return np.stack([r.combined() for r in self.regions])

    def max_gain_norm(self) -> float:
        if not self.regions:
            return 0.0
        return max(float(np.linalg.norm(r.gain, 2)) for r in self.regions)


def pre_activation_bounds(net, box: Box) -> Tuple[np.ndarray, np.ndarray]:
    center = net.pre_activation(box.center)
    radius = np.abs(net.W1) @ (box.widths / 2.0)
    return center - radius, center + radius


def region_affine(net, pattern) -> Tuple[np.ndarray, np.ndarray]:
    """``K = W2 diag(a) W1`` and ``b = W2 diag(a) b1 + b2``"""
    active = np.asarray(pattern, dtype=float)
    scaled = net.W2 * active
    return scaled @ net.W1, scaled @ net.b1 + net.b2


def _interior_witness(net, box: Box, assigned) -> Optional[np.ndarray]:
    if not assigned:
        return box.center
    n = net.state_dim
    rows, rhs = [], []
    for neuron, active in assigned:
        weights = net.W1[neuron]
        norm = np.linalg.norm(weights)
        sign = -1.0 if active else 1.0
        rows.append(np.append(sign * weights / norm, 1.0))
        rhs.append(-sign * net.b1[neuron] / norm)
    bounds = [(lo, hi) for lo, hi in zip(box.lo, box.hi)] + [(None, 1.0)]
    objective = np.zeros(n + 1)
    objective[-1] = -1.0
    result = linprog(objective, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if result.status != 0 or -result.fun <= INTERIOR_SLACK:
        return None
    return result.x[:n]


def nn_to_cpwa_over(net, box: Box, max_regions: Optional[int] = None) -> CPWAFunction:
    if max_regions is None:
        max_regions = get_app_setting("policies", "max_regions")
    lower, upper = pre_activation_bounds(net, box)
    fixed_active = lower >= 0
    crossing = tuple(int(i) for i in np.flatnonzero((lower < 0) & (upper > 0)))

    regions: List[AffineRegion] = []
    stack = [()]
    while stack:
        assigned = stack.pop()
        witness = _interior_witness(net, box, assigned)
        if witness is None:
            continue
        if len(assigned) < len(crossing):
            neuron = crossing[len(assigned)]
            stack.append(assigned + ((neuron, False),))
            stack.append(assigned + ((neuron, True),))
            continue
        pattern = fixed_active.copy()
        for neuron, active in assigned:
            pattern[neuron] = active
        gain, offset = region_affine(net, pattern)
        regions.append(AffineRegion(tuple(bool(a) for a in pattern), gain, offset, witness))
        if len(regions) > max_regions:
            raise RegionEnumerationError(
                "activation pattern enumeration exceeded the limit", len(regions)
            )
    logger.debug("%d regions over %s (%d crossing neurons)", len(regions), box, len(crossing))
    return CPWAFunction(box, regions, crossing)
