"""
Nominal models ``f`` and simulation-only model errors ``g``

The true system evolves as ``x' = f(x, u) + g(x, u)`` with ``g`` bounded
by an axis-aligned box ``D``. Models evaluate on batches: ``x`` has shape
``(..., n)`` and ``u`` shape ``(..., m)``.
"""
import logging
from typing import Tuple

import numpy as np

from safecompose.core import intervals
from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import DimensionMismatchError
from safecompose.core.geometry import Box
from safecompose.core.intervals import Interval

logger = logging.getLogger(__name__)


class NominalModel:
    """
    Known part ``f`` of discrete-time dynamics

    Subclasses define :py:meth:`evaluate`, its interval extension
    :py:meth:`step_interval` and :py:meth:`jacobian_bounds`.
    """

    name = None
    state_dim = None
    input_dim = None
    #: dimensions stored wrapped into [0, 2*pi)
    periodic_dims: Tuple[int, ...] = ()

    def __init__(self, dt=0.1):
        if dt <= 0:
            raise ValueError("time step must be positive, got %r" % dt)
        self.dt = float(dt)

    def parameters(self) -> dict:
        return {"dt": self.dt}

    def check_dimensions(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if x.shape[-1:] != (self.state_dim,):
            raise DimensionMismatchError(
                "%s expects states of dimension %d, got shape %s"
                % (self.name, self.state_dim, x.shape)
            )
        if u.shape[-1:] != (self.input_dim,):
            raise DimensionMismatchError(
                "%s expects inputs of dimension %d, got shape %s"
                % (self.name, self.input_dim, u.shape)
            )
        return x, u

    def wrap(self, x):
        x = np.array(x, dtype=float)
        for dim in self.periodic_dims:
            x[..., dim] = intervals.wrap_angle(x[..., dim])
        return x

    def evaluate(self, x, u) -> np.ndarray:
        raise NotImplementedError

    def step(self, x, u) -> np.ndarray:
        x, u = self.check_dimensions(x, u)
        return self.wrap(self.evaluate(x, u))

    def step_interval(self, x: Interval, u: Interval) -> Interval:
        """
        Enclosure of ``f`` over the state interval ``x`` and input
        interval ``u``; periodic dimensions are returned unwrapped
        """
        raise NotImplementedError

    def jacobian_bounds(self, x: Interval, u: Interval) -> Tuple[Interval, Interval]:
        """Interval enclosures of ``df/dx`` (n x n) and ``df/du`` (n x m)"""
        raise NotImplementedError

    def lipschitz_constants(self, x: Interval, u: Interval) -> Tuple[float, float]:
        """
        Lipschitz constants of ``f`` in ``x`` and in ``u`` over the given
        intervals, as spectral norms of the elementwise magnitude bounds
        """
        jac_x, jac_u = self.jacobian_bounds(x, u)
        return (
            float(np.linalg.norm(jac_x.magnitude, 2)),
            float(np.linalg.norm(jac_u.magnitude, 2)),
        )

    def __repr__(self):
        params = ", ".join("%s=%r" % item for item in sorted(self.parameters().items()))
        return "%s(%s)" % (type(self).__name__, params)


class DubinsCar(NominalModel):
    """Constant-speed unicycle; the input is the turn rate"""

    name = "dubins"
    state_dim = 3
    input_dim = 1
    periodic_dims = (2,)

    def __init__(self, speed=3.0, dt=0.1):
        super().__init__(dt)
        self.speed = float(speed)

    def parameters(self) -> dict:
        return {"dt": self.dt, "speed": self.speed}

    def evaluate(self, x, u):
        heading = x[..., 2]
        reach = self.dt * self.speed
        return np.stack(
            [
                x[..., 0] + reach * np.cos(heading),
                x[..., 1] + reach * np.sin(heading),
                heading + self.dt * u[..., 0],
            ],
            axis=-1,
        )

    def step_interval(self, x, u):
        reach = self.dt * self.speed
        heading = x[2]
        x_next = x[0] + reach * intervals.cos(heading)
        y_next = x[1] + reach * intervals.sin(heading)
        heading_next = heading + self.dt * u[0]
        return Interval(
            np.array([x_next.lower, y_next.lower, heading_next.lower]),
            np.array([x_next.upper, y_next.upper, heading_next.upper]),
        )

    def jacobian_bounds(self, x, u):
        reach = self.dt * self.speed
        heading = x[2]
        d_sin = -reach * intervals.sin(heading)
        d_cos = reach * intervals.cos(heading)
        lower = np.eye(3)
        upper = np.eye(3)
        lower[0, 2], upper[0, 2] = d_sin.lower, d_sin.upper
        lower[1, 2], upper[1, 2] = d_cos.lower, d_cos.upper
        jac_u = np.array([[0.0], [0.0], [self.dt]])
        return Interval(lower, upper), Interval(jac_u, jac_u)


class DriftIntegrator(NominalModel):
    """
    Two-dimensional integrator drifting at a constant rate along the
    first axis, steered along the second
    """

    name = "drift_integrator"
    state_dim = 2
    input_dim = 1

    def __init__(self, drift=1.0, dt=0.1):
        super().__init__(dt)
        self.drift = float(drift)

    def parameters(self) -> dict:
        return {"dt": self.dt, "drift": self.drift}

    def evaluate(self, x, u):
        return np.stack(
            [x[..., 0] + self.dt * self.drift, x[..., 1] + self.dt * u[..., 0]], axis=-1
        )

    def step_interval(self, x, u):
        first = x[0] + self.dt * self.drift
        second = x[1] + self.dt * u[0]
        return Interval(
            np.array([first.lower, second.lower]), np.array([first.upper, second.upper])
        )

    def jacobian_bounds(self, x, u):
        jac_u = np.array([[0.0], [self.dt]])
        return Interval(np.eye(2), np.eye(2)), Interval(jac_u, jac_u)


class ModelErrorTruth:
    """
    Simulation-only model error ``g``; never visible to synthesis
    """

    name = None

    def __call__(self, x, u) -> np.ndarray:
        raise NotImplementedError

    def parameters(self) -> dict:
        return {}


class ZeroModelError(ModelErrorTruth):
    name = "zero"

    def __call__(self, x, u):
        return np.zeros_like(np.asarray(x, dtype=float))


class ConstantModelError(ModelErrorTruth):
    name = "constant"

    def __init__(self, offset):
        self.offset = np.asarray(offset, dtype=float)

    def parameters(self) -> dict:
        return {"offset": self.offset.tolist()}

    def __call__(self, x, u):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.offset.shape[0]:
            raise DimensionMismatchError(
                "offset has dimension %d, state %d" % (self.offset.shape[0], x.shape[-1])
            )
        return np.broadcast_to(self.offset, x.shape).copy()


class TrigonometricModelError(ModelErrorTruth):
    """
    Smooth field ``(a(1 + sin x1)/2, a(1 + cos x2)/2, 0, ...)`` with
    range ``[0, a]`` in the first two dimensions
    """

    name = "trigonometric"

    def __init__(self, amplitude=0.05):
        self.amplitude = float(amplitude)

    def parameters(self) -> dict:
        return {"amplitude": self.amplitude}

    def __call__(self, x, u):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] < 2:
            raise DimensionMismatchError("trigonometric error needs at least 2 states")
        out = np.zeros_like(x)
        out[..., 0] = self.amplitude * (1.0 + np.sin(x[..., 0])) / 2.0
        out[..., 1] = self.amplitude * (1.0 + np.cos(x[..., 1])) / 2.0
        return out


def check_disturbance_bound(truth, bound: Box, state_box: Box, input_box: Box, rng, samples=None):
    """
    Sample ``g`` over ``state_box x input_box`` and return the fraction
    of samples falling outside ``bound`` (0.0 for a sound bound)
    """
    if samples is None:
        samples = get_app_setting("dynamics", "bound_check_samples")
    x = state_box.sample(rng, samples)
    u = input_box.sample(rng, samples)
    outside = ~bound.contains_points(truth(x, u))
    fraction = float(outside.mean()) if samples else 0.0
    if fraction > 0:
        logger.warning(
            "model error leaves the declared bound %s on %.4f%% of %d samples",
            bound,
            100 * fraction,
            samples,
        )
    return fraction
