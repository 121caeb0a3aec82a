"""
Lipschitz constants of the local networks and of the Gaussian
stochastic kernel ``t(y | x, u) = N(y; f(x, u) + mu(x, u), diag(s^2))``

Within a cell the kernel standard deviation is held at the smallest
posterior value found on the cell, floored. The kernel constants are
``L_x * I`` and ``L_u * I`` where ``L_x``, ``L_u`` bound the mean
sensitivities and ``I`` integrates, over the safe set, the largest
density gradient any mean in the cell's mean box can produce.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from safecompose.apps.abstraction.kernels import WRAP_SHIFTS
from safecompose.apps.abstraction.reachability import input_range
from safecompose.apps.policies.cpwa import nn_to_cpwa_over
from safecompose.core.application import get_app_setting
from safecompose.core.geometry import Box
from safecompose.core.intervals import Interval

logger = logging.getLogger(__name__)

SQRT_TWO_PI = np.sqrt(2.0 * np.pi)


def nn_lipschitz(net, cell_box: Box) -> float:
    """Largest spectral norm of a region gain of ``net`` over the cell"""
    return nn_to_cpwa_over(net, cell_box).max_gain_norm()


def gain_bound(controller_grid) -> float:
    """Spectral norm bound of the state gain over the global controller box"""
    box = controller_grid.global_box
    shape = (controller_grid.input_dim, controller_grid.state_dim + 1)
    largest = np.maximum(np.abs(box.lo), np.abs(box.hi)).reshape(shape)
    return float(np.linalg.norm(largest[:, :-1], 2))


def cell_lipschitz(store, mdp, q: int) -> float:
    """
    ``L_i``: the largest network constant over every stored transition
    leaving ``q``; with none stored, the gain bound every projected
    network obeys
    """
    box = mdp.partition.cell_box(q)
    constants = [nn_lipschitz(store[key], box) for key in store if key.q == q]
    if not constants:
        logger.debug("cell %d has no stored network; L uses the controller gain bound", q)
        return gain_bound(mdp.controller_grid)
    return max(constants)


@dataclass(frozen=True)
class GaussianKernelCell:
    """Everything the kernel constants of one cell depend on"""

    mean_box: Box
    std: np.ndarray
    #: bounds on the spectral norm of d mean / dx and d mean / du
    state_sensitivity: float
    input_sensitivity: float
    periodic_dims: Tuple[int, ...] = ()
    #: whether the variance floor replaced a smaller posterior variance
    floored: bool = False


def _axis_envelopes(y, lo, hi, s, periodic):
    """Per-axis suprema of the density and of its mean derivative over ``m`` in ``[lo, hi]``"""
    peak = 1.0 / (s * SQRT_TWO_PI)
    density = np.zeros_like(y)
    slope = np.zeros_like(y)
    for shift in WRAP_SHIFTS if periodic else (0.0,):
        image = y + shift
        nearest = np.maximum(np.maximum(lo - image, image - hi), 0.0)
        farthest = np.maximum(np.abs(image - lo), np.abs(image - hi))
        density += peak * np.exp(-0.5 * (nearest / s) ** 2)
        # |d phi / dm| = d / s^2 phi(d) peaks at d = s
        d = np.clip(s, nearest, farthest)
        slope += peak * d / s ** 2 * np.exp(-0.5 * (d / s) ** 2)
    return density, slope


def gradient_envelope(cell: GaussianKernelCell, points) -> np.ndarray:
    """Upper bound on ``sup_m ||grad_m N(y; m, diag(s^2))||`` at every ``y`` in ``points``"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    densities, slopes = [], []
    for axis in range(points.shape[1]):
        density, slope = _axis_envelopes(
            points[:, axis],
            cell.mean_box.lo[axis],
            cell.mean_box.hi[axis],
            float(cell.std[axis]),
            axis in cell.periodic_dims,
        )
        densities.append(density)
        slopes.append(slope)
    densities = np.stack(densities, axis=1)
    slopes = np.stack(slopes, axis=1)
    total = np.zeros(len(points))
    for axis in range(points.shape[1]):
        others = np.prod(np.delete(densities, axis, axis=1), axis=1)
        total += (slopes[:, axis] * others) ** 2
    return np.sqrt(total)


def envelope_integral(cell: GaussianKernelCell, boxes: Sequence[Box], resolution: int) -> float:
    """Midpoint rule with ``resolution`` nodes per axis in every box"""
    total = 0.0
    for box in boxes:
        nodes = box.midpoints(resolution)
        total += box.volume / len(nodes) * float(gradient_envelope(cell, nodes).sum())
    return total


def kernel_cell(mdp, q: int, model, gp, variance_floor: Optional[float] = None) -> GaussianKernelCell:
    """
    Mean box, sensitivities and standard deviation of the kernel over
    cell ``q`` and every input the global controller box can produce
    """
    if variance_floor is None:
        variance_floor = get_app_setting("bounds", "variance_floor")
    partition = mdp.partition
    n, m = mdp.state_dim, mdp.input_dim
    box = partition.cell_box(q)
    x = Interval.from_box(box)
    u = input_range(box, mdp.controller_grid.global_box, m)

    reach = model.step_interval(x, u)
    mean_lo, mean_hi = reach.lower.copy(), reach.upper.copy()
    jac_x, jac_u = model.jacobian_bounds(x, u)
    sens_x, sens_u = jac_x.magnitude, jac_u.magnitude

    if gp is not None:
        center = np.concatenate([box.center, (u.lower + u.upper) / 2.0])
        half = np.concatenate([box.widths, u.upper - u.lower]) / 2.0
        gradient = gp.mean_gradient_bound()
        mu, _ = gp.predict(center[None, :])
        radius = gradient @ half
        mean_lo += mu[0] - radius
        mean_hi += mu[0] + radius
        sens_x = sens_x + gradient[:, :n]
        sens_u = sens_u + gradient[:, n:]
        states = box.midpoints(2)
        inputs = np.stack([u.lower, (u.lower + u.upper) / 2.0, u.upper])
        queries = np.hstack([np.repeat(states, len(inputs), axis=0), np.tile(inputs, (len(states), 1))])
        _, variances = gp.predict(queries)
        variance = variances.min(axis=0)
    else:
        variance = np.zeros(n)

    floored = bool(np.any(variance < variance_floor))
    if floored:
        logger.warning(
            "cell %d: posterior variance %.3e below the floor; kernel constants use %.1e",
            q,
            float(variance.min()),
            variance_floor,
        )
    return GaussianKernelCell(
        mean_box=Box(mean_lo, mean_hi),
        std=np.sqrt(np.maximum(variance, variance_floor)),
        state_sensitivity=float(np.linalg.norm(sens_x, 2)),
        input_sensitivity=float(np.linalg.norm(sens_u, 2)),
        periodic_dims=tuple(partition.periodic_dims),
        floored=floored,
    )


def kernel_lipschitz(
    cell: GaussianKernelCell,
    boxes: Sequence[Box],
    resolution: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> Tuple[float, float]:
    """
    ``(Lambda_i, Gamma_i)`` integrated over ``boxes``; the integral is
    taken at resolutions ``r`` and ``2r`` and the finer value is kept
    """
    if resolution is None:
        resolution = get_app_setting("bounds", "quadrature_resolution")
    if tolerance is None:
        tolerance = get_app_setting("bounds", "quadrature_tolerance")
    coarse = envelope_integral(cell, boxes, resolution)
    fine = envelope_integral(cell, boxes, 2 * resolution)
    if fine > 0 and abs(fine - coarse) > tolerance * fine:
        logger.warning(
            "kernel integral changes by %.2f%% between %d and %d nodes per axis",
            100 * abs(fine - coarse) / fine,
            resolution,
            2 * resolution,
        )
    return cell.state_sensitivity * fine, cell.input_sensitivity * fine
