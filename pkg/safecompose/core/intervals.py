"""
Vectorised interval arithmetic

Every :class:`Interval` holds elementwise lower and upper bounds of the
same shape. Operations return enclosures of the exact range, which is
what the reachability routine and the Jacobian bounds rely on.
"""
import numpy as np

from safecompose.core.exceptions import IntervalDomainError

TWO_PI = 2.0 * np.pi


class Interval:
    def __init__(self, lower, upper=None):
        lower = np.asarray(lower, dtype=float)
        upper = lower if upper is None else np.asarray(upper, dtype=float)
        lower, upper = np.broadcast_arrays(lower, upper)
        if np.any(lower > upper):
            raise IntervalDomainError("empty interval [%s, %s]" % (lower, upper))
        self._lower = np.array(lower)
        self._upper = np.array(upper)

    @classmethod
    def from_box(cls, box) -> "Interval":
        return cls(box.lo, box.hi)

    @property
    def lower(self) -> np.ndarray:
        return self._lower

    @property
    def upper(self) -> np.ndarray:
        return self._upper

    @property
    def width(self) -> np.ndarray:
        return self._upper - self._lower

    @property
    def magnitude(self) -> np.ndarray:
        return np.maximum(np.abs(self._lower), np.abs(self._upper))

    @property
    def shape(self):
        return self._lower.shape

    def __getitem__(self, item) -> "Interval":
        return Interval(self._lower[item], self._upper[item])

    def __add__(self, other) -> "Interval":
        other = _coerce(other)
        return Interval(self._lower + other.lower, self._upper + other.upper)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self._upper, -self._lower)

    def __sub__(self, other) -> "Interval":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Interval":
        return _coerce(other) - self

    def __mul__(self, other) -> "Interval":
        other = _coerce(other)
        products = np.stack(
            [
                self._lower * other.lower,
                self._lower * other.upper,
                self._upper * other.lower,
                self._upper * other.upper,
            ]
        )
        return Interval(products.min(axis=0), products.max(axis=0))

    __rmul__ = __mul__

    def union(self, other) -> "Interval":
        other = _coerce(other)
        return Interval(
            np.minimum(self._lower, other.lower), np.maximum(self._upper, other.upper)
        )

    def outward(self) -> "Interval":
        """Round both bounds one ulp away from the interior"""
        return Interval(
            np.nextafter(self._lower, -np.inf), np.nextafter(self._upper, np.inf)
        )

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self._lower) and np.all(x <= self._upper))

    def __repr__(self):
        return "Interval(%s, %s)" % (self._lower, self._upper)


def _coerce(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval(value, value)


def _hits(lower, upper, phase):
    # is there an integer k with lower <= phase + 2*pi*k <= upper
    return np.ceil((lower - phase) / TWO_PI) <= np.floor((upper - phase) / TWO_PI)


def cos(x: Interval) -> Interval:
    """Exact range of ``cos`` over each interval"""
    lo, hi = x.lower, x.upper
    at_ends = np.stack([np.cos(lo), np.cos(hi)])
    lower = at_ends.min(axis=0)
    upper = at_ends.max(axis=0)
    upper = np.where(_hits(lo, hi, 0.0), 1.0, upper)
    lower = np.where(_hits(lo, hi, np.pi), -1.0, lower)
    full = (hi - lo) >= TWO_PI
    return Interval(np.where(full, -1.0, lower), np.where(full, 1.0, upper))


def sin(x: Interval) -> Interval:
    return cos(x - np.pi / 2.0)


def affine_feedback(gains: Interval, x: Interval) -> Interval:
    """
    Enclose ``u = K [x; 1]`` for every gain matrix ``K`` in ``gains``
    (shape ``m x (n + 1)``) and every ``x`` in ``x`` (shape ``n``)
    """
    augmented = Interval(np.append(x.lower, 1.0), np.append(x.upper, 1.0))
    products = gains * Interval(
        np.broadcast_to(augmented.lower, gains.shape),
        np.broadcast_to(augmented.upper, gains.shape),
    )
    return Interval(products.lower.sum(axis=1), products.upper.sum(axis=1))


def wrap_angle(theta):
    wrapped = np.mod(theta, TWO_PI)
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)
