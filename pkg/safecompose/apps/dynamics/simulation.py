import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from safecompose.core.exceptions import ControllerEvaluationError, SafeComposeError

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    states: List[np.ndarray] = field(default_factory=list)
    inputs: List[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.states)

    @property
    def steps(self) -> int:
        return len(self.inputs)

    def state_array(self) -> np.ndarray:
        return np.array(self.states)

    def input_array(self) -> np.ndarray:
        return np.array(self.inputs)


def step_nominal(model, x, u) -> np.ndarray:
    return model.step(x, u)


def step_true(model, truth, x, u) -> np.ndarray:
    x, u = model.check_dimensions(x, u)
    if truth is None:
        return model.step(x, u)
    return model.wrap(model.evaluate(x, u) + truth(x, u))


def simulate(
    controller: Callable[[np.ndarray, int], np.ndarray],
    x0,
    horizon: int,
    model,
    truth=None,
    stop: Optional[Callable[[np.ndarray], bool]] = None,
) -> Trajectory:
    """
    Closed-loop rollout of at most ``horizon`` steps

    ``stop`` is checked on every state including ``x0``; the rollout ends
    at the first state for which it holds.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative, got %r" % horizon)
    x = model.wrap(np.asarray(x0, dtype=float))
    trajectory = Trajectory(states=[x])
    if stop is not None and stop(x):
        return trajectory
    for k in range(horizon):
        try:
            u = np.atleast_1d(np.asarray(controller(x, k), dtype=float))
        except SafeComposeError:
            raise
        except Exception as error:
            raise ControllerEvaluationError(repr(error), step=k) from error
        if not np.all(np.isfinite(u)):
            raise ControllerEvaluationError("non-finite input %s" % u, step=k)
        x = step_true(model, truth, x, u)
        trajectory.inputs.append(u)
        trajectory.states.append(x)
        if stop is not None and stop(x):
            logger.debug("rollout stopped at step %d", k + 1)
            break
    return trajectory
