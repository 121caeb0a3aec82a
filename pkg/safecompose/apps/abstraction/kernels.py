"""
Probability that a Gaussian with diagonal covariance lands in a box

Dimensions integrate independently; a dimension with zero variance is a
point mass.
"""
import numpy as np
from scipy.stats import norm

from safecompose.core.intervals import TWO_PI, wrap_angle

#: image shifts summed for a wrapped heading coordinate
WRAP_SHIFTS = (-TWO_PI, 0.0, TWO_PI)


def interval_mass(a, b):
    """``Phi(b) - Phi(a)`` computed on the tail that keeps precision"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    upper_tail = a > 0
    mass = np.where(upper_tail, norm.sf(a) - norm.sf(b), norm.cdf(b) - norm.cdf(a))
    return np.clip(mass, 0.0, 1.0)


def gaussian_box_prob(mean, variance, box) -> float:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    variance = np.atleast_1d(np.asarray(variance, dtype=float))
    lo, hi = box.lo, box.hi
    if np.any(lo > hi):
        raise ValueError("box lower bound exceeds upper bound")
    if np.any(variance < 0):
        raise ValueError("variance must be nonnegative")
    std = np.sqrt(variance)
    probability = 1.0
    for mu, sigma, a, b in zip(mean, std, lo, hi):
        if sigma == 0.0:
            probability *= 1.0 if a <= mu <= b else 0.0
        else:
            probability *= float(interval_mass((a - mu) / sigma, (b - mu) / sigma))
    return probability


def axis_masses(edges, mean: float, std: float, periodic=False) -> np.ndarray:
    """
    Probability of every cell along one grid axis; cells partition the
    axis so the masses sum to at most one
    """
    count = len(edges) - 1
    if std == 0.0:
        masses = np.zeros(count)
        value = float(wrap_angle(mean)) if periodic else mean
        if edges[0] <= value <= edges[-1]:
            index = max(int(np.searchsorted(edges, value, side="left")) - 1, 0)
            masses[index] = 1.0
        return masses
    if not periodic:
        return interval_mass((edges[:-1] - mean) / std, (edges[1:] - mean) / std)
    centered = float(wrap_angle(mean))
    masses = np.zeros(count)
    for shift in WRAP_SHIFTS:
        image = centered + shift
        masses += interval_mass((edges[:-1] - image) / std, (edges[1:] - image) / std)
    return np.minimum(masses, 1.0)


def cell_probabilities(partition, mean, variance, cell_ids) -> np.ndarray:
    """Probability of each cell in ``cell_ids`` under ``N(mean, diag(variance))``"""
    cell_ids = np.asarray(cell_ids, dtype=int)
    if cell_ids.size == 0:
        return np.zeros(0)
    std = np.sqrt(np.maximum(np.asarray(variance, dtype=float), 0.0))
    index = np.unravel_index(cell_ids, partition.counts, order="F")
    probabilities = np.ones(cell_ids.size)
    for axis in range(partition.dim):
        masses = axis_masses(
            partition.edges[axis],
            float(mean[axis]),
            float(std[axis]),
            periodic=axis in partition.periodic_dims,
        )
        probabilities *= masses[index[axis]]
    return probabilities
