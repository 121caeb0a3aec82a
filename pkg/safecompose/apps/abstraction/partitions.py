"""
Uniform product grids over the state space and the controller space

Cells are numbered with the first axis varying fastest. Along every
axis a cell owns its upper face; the first cell also owns the lower
domain face, so points on a shared face belong to the lower-id cell.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from safecompose.core.exceptions import DimensionMismatchError
from safecompose.core.geometry import Box
from safecompose.core.intervals import TWO_PI

logger = logging.getLogger(__name__)


class UniformGrid:
    def __init__(self, domain: Box, counts: Sequence[int], allow_degenerate=False):
        counts = tuple(int(c) for c in counts)
        if len(counts) != domain.dim:
            raise DimensionMismatchError(
                "%d cell counts for a %d-dimensional domain" % (len(counts), domain.dim)
            )
        if any(c < 1 for c in counts):
            raise ValueError("cell counts must be at least 1, got %s" % (counts,))
        flat = domain.widths <= 0
        if np.any(flat):
            if not allow_degenerate:
                raise ValueError("domain %s has zero measure" % domain)
            if any(counts[i] != 1 for i in np.flatnonzero(flat)):
                raise ValueError("a zero-width axis can only hold a single cell")
        self.domain = domain
        self.counts = counts
        self.edges = [
            np.linspace(lo, hi, count + 1) for lo, hi, count in zip(domain.lo, domain.hi, counts)
        ]

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __len__(self):
        return int(np.prod(self.counts))

    def ravel(self, index) -> int:
        return int(np.ravel_multi_index(tuple(index), self.counts, order="F"))

    def unravel(self, cell_id) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(cell_id, self.counts, order="F"))

    @cached_property
    def lowers(self) -> np.ndarray:
        ids = np.unravel_index(np.arange(len(self)), self.counts, order="F")
        return np.stack([self.edges[d][ids[d]] for d in range(self.dim)], axis=1)

    @cached_property
    def uppers(self) -> np.ndarray:
        ids = np.unravel_index(np.arange(len(self)), self.counts, order="F")
        return np.stack([self.edges[d][ids[d] + 1] for d in range(self.dim)], axis=1)

    @cached_property
    def centers(self) -> np.ndarray:
        return (self.lowers + self.uppers) / 2.0

    def cell_box(self, cell_id) -> Box:
        return Box(self.lowers[cell_id], self.uppers[cell_id])

    def axis_index(self, axis: int, value: float) -> Optional[int]:
        edges = self.edges[axis]
        if value < edges[0] or value > edges[-1]:
            return None
        return max(int(np.searchsorted(edges, value, side="left")) - 1, 0)

    def locate(self, point) -> Optional[int]:
        """Id of the cell holding ``point``, ``None`` outside the domain"""
        point = np.asarray(point, dtype=float).ravel()
        if point.shape[0] != self.dim:
            raise DimensionMismatchError(
                "expected a point of dimension %d, got %d" % (self.dim, point.shape[0])
            )
        index = []
        for axis, value in enumerate(point):
            i = self.axis_index(axis, value)
            if i is None:
                return None
            index.append(i)
        return self.ravel(index)

    def axis_overlap(self, axis: int, lo: float, hi: float) -> np.ndarray:
        """Indices along ``axis`` of cells whose closed extent meets [lo, hi]"""
        edges = self.edges[axis]
        if hi < edges[0] or lo > edges[-1]:
            return np.zeros(0, dtype=int)
        first = int(np.searchsorted(edges[1:], lo, side="left"))
        last = int(np.searchsorted(edges[:-1], hi, side="right")) - 1
        first = min(max(first, 0), self.counts[axis] - 1)
        last = min(max(last, 0), self.counts[axis] - 1)
        return np.arange(first, last + 1)

    def ids_from_axes(self, per_axis: List[np.ndarray]) -> np.ndarray:
        if any(len(a) == 0 for a in per_axis):
            return np.zeros(0, dtype=int)
        mesh = np.meshgrid(*per_axis, indexing="ij")
        ids = np.ravel_multi_index(tuple(m.ravel() for m in mesh), self.counts, order="F")
        return np.sort(ids)

    @property
    def diameter(self) -> float:
        """Largest within-cell Euclidean distance"""
        return float(np.linalg.norm(self.domain.widths / np.array(self.counts)))

    @property
    def max_width(self) -> float:
        """Largest within-cell distance in the max-norm"""
        return float(np.max(self.domain.widths / np.array(self.counts)))

    def grid_spec(self) -> dict:
        return {"domain": self.domain.to_list(), "counts": list(self.counts)}


@dataclass(frozen=True)
class AbstractState:
    id: int
    box: Box

    @property
    def center(self) -> np.ndarray:
        return self.box.center


class StatePartition(UniformGrid):
    """Abstract states ``q_1..q_N`` covering the state domain"""

    def __init__(self, domain: Box, counts: Sequence[int], periodic_dims: Sequence[int] = ()):
        super().__init__(domain, counts)
        self.periodic_dims = tuple(periodic_dims)
        for dim in self.periodic_dims:
            if not np.isclose(domain.widths[dim], TWO_PI) or not np.isclose(domain.lo[dim], 0.0):
                raise ValueError("periodic axis %d must span [0, 2*pi]" % dim)

    @cached_property
    def states(self) -> List[AbstractState]:
        return [AbstractState(i, self.cell_box(i)) for i in range(len(self))]

    def abs_x(self, x) -> Optional[AbstractState]:
        cell_id = self.locate(x)
        return None if cell_id is None else self.states[cell_id]

    def overlapping(self, box: Box) -> np.ndarray:
        """
        Ids of the cells whose closed box meets ``box``; ``box`` may be
        unwrapped along periodic axes
        """
        if box.dim != self.dim:
            raise DimensionMismatchError(
                "expected a %d-dimensional box, got %d" % (self.dim, box.dim)
            )
        per_axis = []
        for axis in range(self.dim):
            lo, hi = box.lo[axis], box.hi[axis]
            if axis not in self.periodic_dims:
                per_axis.append(self.axis_overlap(axis, lo, hi))
            elif hi - lo >= TWO_PI:
                per_axis.append(np.arange(self.counts[axis]))
            else:
                start = float(np.mod(lo, TWO_PI))
                stop = start + (hi - lo)
                parts = [self.axis_overlap(axis, start, min(stop, TWO_PI))]
                if stop >= TWO_PI:
                    parts.append(self.axis_overlap(axis, 0.0, stop - TWO_PI))
                per_axis.append(np.unique(np.concatenate(parts)))
        return self.ids_from_axes(per_axis)

    def leaves_domain(self, box: Box) -> bool:
        """Does ``box`` reach outside the domain along a non-periodic axis"""
        for axis in range(self.dim):
            if axis in self.periodic_dims:
                continue
            if box.lo[axis] < self.domain.lo[axis] or box.hi[axis] > self.domain.hi[axis]:
                return True
        return False

    def to_dict(self) -> dict:
        spec = self.grid_spec()
        spec["periodic_dims"] = list(self.periodic_dims)
        spec["cells"] = [
            {"id": s.id, "box": s.box.to_list(), "center": s.center.tolist()} for s in self.states
        ]
        return spec

    @classmethod
    def from_dict(cls, data: dict) -> "StatePartition":
        return cls(Box.from_bounds(data["domain"]), data["counts"], data.get("periodic_dims", ()))


@dataclass(frozen=True)
class ControllerPartition:
    """A box of affine feedback laws ``u = K' x + b'``, flattened row by row"""

    id: int
    box: Box
    input_dim: int

    @property
    def center(self) -> np.ndarray:
        return self.box.center

    def center_matrix(self) -> np.ndarray:
        return self.center.reshape(self.input_dim, -1)

    def bounds_matrix(self) -> Tuple[np.ndarray, np.ndarray]:
        return (
            self.box.lo.reshape(self.input_dim, -1),
            self.box.hi.reshape(self.input_dim, -1),
        )

    def control(self, x) -> np.ndarray:
        """``kappa(x)`` for the center gain, on single points or batches"""
        gains = self.center_matrix()
        x = np.asarray(x, dtype=float)
        return x @ gains[:, :-1].T + gains[:, -1]


class ControllerGrid(UniformGrid):
    """Controller partitions ``P_1..P_M`` of the global box ``P^{K x b}``"""

    def __init__(self, global_box: Box, counts: Sequence[int], state_dim: int, input_dim: int):
        if global_box.dim != input_dim * (state_dim + 1):
            raise DimensionMismatchError(
                "a %d-input, %d-state controller box needs %d entries, got %d"
                % (input_dim, state_dim, input_dim * (state_dim + 1), global_box.dim)
            )
        super().__init__(global_box, counts, allow_degenerate=True)
        self.state_dim = state_dim
        self.input_dim = input_dim

    @property
    def global_box(self) -> Box:
        return self.domain

    @cached_property
    def partitions(self) -> List[ControllerPartition]:
        return [ControllerPartition(i, self.cell_box(i), self.input_dim) for i in range(len(self))]

    def abs_p(self, gains) -> Optional[ControllerPartition]:
        cell_id = self.locate(np.asarray(gains, dtype=float).ravel())
        return None if cell_id is None else self.partitions[cell_id]

    def to_dict(self) -> dict:
        spec = self.grid_spec()
        spec.update({"state_dim": self.state_dim, "input_dim": self.input_dim})
        spec["cells"] = [
            {"id": p.id, "box": p.box.to_list(), "center": p.center.tolist()}
            for p in self.partitions
        ]
        return spec

    @classmethod
    def from_dict(cls, data: dict) -> "ControllerGrid":
        return cls(
            Box.from_bounds(data["domain"]), data["counts"], data["state_dim"], data["input_dim"]
        )


def build_state_grid(domain: Box, counts: Sequence[int], periodic_dims=()) -> StatePartition:
    partition = StatePartition(domain, counts, periodic_dims)
    logger.info(
        "state grid %s: %d cells, diameter %.4g", partition.counts, len(partition), partition.diameter
    )
    return partition


def build_controller_grid(global_box: Box, counts, state_dim: int, input_dim: int) -> ControllerGrid:
    grid = ControllerGrid(global_box, counts, state_dim, input_dim)
    logger.info("controller grid %s: %d partitions", grid.counts, len(grid))
    return grid
