"""
Weight projection: modify a local network until every affine piece it
realises over its cell has ``[K | b]`` inside the controller partition

Stages, in order, stopping at the first compliant network:

``compliant``      the network already satisfies the containment
``least_squares``  output layer refitted so every region hits its
                   clamped target (exact for a single region)
``constrained``    output layer re-solved with the containment as
                   linear inequalities, minimal change
``linearised``     hidden biases shifted so every neuron is active over
                   the cell, then the output layer refitted
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog, minimize

from safecompose.apps.policies.cpwa import CPWAFunction, nn_to_cpwa_over
from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import DimensionMismatchError, ProjectionInfeasibleError
from safecompose.core.geometry import Box

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionCertificate:
    regions: int
    max_violation: float
    stage: str

    def to_dict(self) -> dict:
        return {"regions": self.regions, "max_violation": self.max_violation, "stage": self.stage}

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectionCertificate":
        return cls(int(data["regions"]), float(data["max_violation"]), data["stage"])


def _bounds(partition_box: Box, input_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    return (
        partition_box.lo.reshape(input_dim, -1),
        partition_box.hi.reshape(input_dim, -1),
    )


def containment_violation(cpwa: CPWAFunction, partition_box: Box, input_dim: int) -> float:
    """Largest componentwise distance of a region's ``[K | b]`` outside the box"""
    if not cpwa.regions:
        return 0.0
    lower, upper = _bounds(partition_box, input_dim)
    combined = cpwa.combined_gains()
    excess = np.maximum(lower - combined, combined - upper)
    return float(max(excess.max(), 0.0))


def _region_design(net, patterns) -> List[np.ndarray]:
    """Per region the ``h x (n + 1)`` matrix ``diag(a) [W1 | b1]``"""
    hidden = np.hstack([net.W1, net.b1[:, None]])
    return [hidden * np.asarray(p, dtype=float)[:, None] for p in patterns]


def _stacked_system(designs) -> np.ndarray:
    """Map from one output row ``(w, beta)`` to every region's ``[K_r | b_r]``"""
    blocks = []
    for design in designs:
        block = np.hstack([design.T, np.zeros((design.shape[1], 1))])
        block[-1, -1] = 1.0
        blocks.append(block)
    return np.vstack(blocks)


def _shrunk(lower, upper, margin):
    span = upper - lower
    return lower + margin * span, upper - margin * span


def _refit_least_squares(net, patterns, partition_box, margin):
    lower, upper = _shrunk(*_bounds(partition_box, net.input_dim), margin)
    system = _stacked_system(_region_design(net, patterns))
    W2, b2 = net.W2.copy(), net.b2.copy()
    for r in range(net.input_dim):
        current = np.append(W2[r], b2[r])
        realised = system @ current
        targets = np.clip(realised, np.tile(lower[r], len(patterns)), np.tile(upper[r], len(patterns)))
        delta, *_ = np.linalg.lstsq(system, targets - realised, rcond=None)
        W2[r], b2[r] = (current + delta)[:-1], (current + delta)[-1]
    return type(net)(net.W1.copy(), net.b1.copy(), W2, b2)


def _refit_constrained(net, patterns, partition_box, margin):
    lower, upper = _shrunk(*_bounds(partition_box, net.input_dim), margin)
    system = _stacked_system(_region_design(net, patterns))
    A_ub = np.vstack([system, -system])
    W2, b2 = net.W2.copy(), net.b2.copy()
    for r in range(net.input_dim):
        b_ub = np.concatenate([np.tile(upper[r], len(patterns)), -np.tile(lower[r], len(patterns))])
        current = np.append(W2[r], b2[r])
        feasible = linprog(
            np.zeros(system.shape[1]),
            A_ub=A_ub,
            b_ub=b_ub,
            bounds=[(None, None)] * system.shape[1],
            method="highs",
        )
        if feasible.status != 0:
            return None
        solution = feasible.x
        refined = minimize(
            lambda v: float(np.sum((v - current) ** 2)),
            solution,
            jac=lambda v: 2.0 * (v - current),
            constraints=[{"type": "ineq", "fun": lambda v: b_ub - A_ub @ v, "jac": lambda v: -A_ub}],
            method="SLSQP",
        )
        if refined.success and np.all(A_ub @ refined.x <= b_ub + 1e-12):
            solution = refined.x
        W2[r], b2[r] = solution[:-1], solution[-1]
    return type(net)(net.W1.copy(), net.b1.copy(), W2, b2)


def _linearise(net, cell_box: Box, margin_value=1e-6):
    center = net.pre_activation(cell_box.center)
    radius = np.abs(net.W1) @ (cell_box.widths / 2.0)
    lowest = center - radius
    b1 = net.b1 + np.maximum(0.0, margin_value - lowest)
    return type(net)(net.W1.copy(), b1, net.W2.copy(), net.b2.copy())


def project_with_certificate(net, partition_box: Box, cell_box: Box, tolerance: Optional[float] = None):
    """Return a compliant network together with its :class:`ProjectionCertificate`"""
    if partition_box.dim != net.input_dim * (net.state_dim + 1):
        raise DimensionMismatchError(
            "partition has %d entries, network needs %d"
            % (partition_box.dim, net.input_dim * (net.state_dim + 1))
        )
    if tolerance is None:
        tolerance = get_app_setting("policies", "containment_tolerance")
    margin = get_app_setting("policies", "projection_margin")

    def certify(candidate, stage):
        cpwa = nn_to_cpwa_over(candidate, cell_box)
        violation = containment_violation(cpwa, partition_box, candidate.input_dim)
        if violation <= tolerance:
            return ProjectionCertificate(len(cpwa), violation, stage)
        return None

    cpwa = nn_to_cpwa_over(net, cell_box)
    violation = containment_violation(cpwa, partition_box, net.input_dim)
    if violation <= 0.0:
        return net.copy(), ProjectionCertificate(len(cpwa), violation, "compliant")

    patterns = [r.pattern for r in cpwa.regions]
    candidate = _refit_least_squares(net, patterns, partition_box, margin)
    certificate = certify(candidate, "least_squares")
    if certificate:
        return candidate, certificate

    candidate = _refit_constrained(net, patterns, partition_box, margin)
    if candidate is not None:
        certificate = certify(candidate, "constrained")
        if certificate:
            return candidate, certificate

    linear = _linearise(net, cell_box)
    single = [tuple([True] * net.hidden_width)]
    for refit in (_refit_least_squares, _refit_constrained):
        candidate = refit(linear, single, partition_box, margin)
        if candidate is not None:
            certificate = certify(candidate, "linearised")
            if certificate:
                return candidate, certificate

    raise ProjectionInfeasibleError(
        "no output layer maps the hidden features over %s into %s (violation %.3e)"
        % (cell_box, partition_box, violation)
    )


def project(net, partition_box: Box, cell_box: Box):
    candidate, certificate = project_with_certificate(net, partition_box, cell_box)
    logger.debug("projection stage %s, %d regions", certificate.stage, certificate.regions)
    return candidate
