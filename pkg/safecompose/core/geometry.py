from typing import Iterable, List, Sequence

import numpy as np

from safecompose.core.exceptions import DimensionMismatchError


class Box:
    """
    Closed axis-aligned box ``{x : lo <= x <= hi}``

    Used for abstract states, controller partitions, the disturbance
    bound, task regions and over-approximated reachable sets.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatchError(
                "box bounds must be vectors of equal length, got %s and %s"
                % (lo.shape, hi.shape)
            )
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound: %s > %s" % (lo, hi))
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_bounds(cls, bounds: Iterable[Sequence[float]]) -> "Box":
        """Build a box from a ``[[lo, hi], ...]`` list"""
        pairs = [tuple(pair) for pair in bounds]
        if any(len(pair) != 2 for pair in pairs):
            raise ValueError("every bound must be a [lo, hi] pair")
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def point(cls, x) -> "Box":
        return cls(x, x)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.widths <= 0.0))

    def _check_dim(self, other_dim):
        if other_dim != self.dim:
            raise DimensionMismatchError(
                "expected dimension %d, got %d" % (self.dim, other_dim)
            )

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        self._check_dim(x.shape[-1])
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def contains_points(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self._check_dim(points.shape[1])
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)

    def contains_box(self, other: "Box", tol: float = 0.0) -> bool:
        self._check_dim(other.dim)
        return bool(np.all(other.lo >= self.lo - tol) and np.all(other.hi <= self.hi + tol))

    def intersects(self, other: "Box") -> bool:
        # closed boxes, touching faces count
        self._check_dim(other.dim)
        return bool(np.all(self.lo <= other.hi) and np.all(other.lo <= self.hi))

    def minkowski_sum(self, other: "Box") -> "Box":
        self._check_dim(other.dim)
        return Box(self.lo + other.lo, self.hi + other.hi)

    def corners(self) -> np.ndarray:
        grids = np.meshgrid(*[(lo, hi) for lo, hi in zip(self.lo, self.hi)], indexing="ij")
        return np.unique(np.stack([g.ravel() for g in grids], axis=1), axis=0)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))

    def midpoints(self, resolution: int) -> np.ndarray:
        """Midpoint-rule nodes, ``resolution`` per non-degenerate axis"""
        axes = []
        for lo, hi in zip(self.lo, self.hi):
            if hi > lo:
                step = (hi - lo) / resolution
                axes.append(lo + step * (np.arange(resolution) + 0.5))
            else:
                axes.append(np.array([lo]))
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @property
    def volume(self) -> float:
        widths = self.widths[self.widths > 0]
        return float(np.prod(widths)) if widths.size else 0.0

    def to_list(self) -> List[List[float]]:
        return [[float(lo), float(hi)] for lo, hi in zip(self.lo, self.hi)]

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __hash__(self):
        return hash((self.lo.tobytes(), self.hi.tobytes()))

    def __repr__(self):
        return "Box(%s)" % self.to_list()
