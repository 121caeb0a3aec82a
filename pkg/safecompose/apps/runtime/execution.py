"""
Closed-loop execution of the composed controller on the true system

The monitor checks the continuous state against the obstacle boxes
first and the goal second, at ``x0`` and after every step.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from safecompose.apps.dynamics.simulation import Trajectory
from safecompose.core.exceptions import ConfigurationError, ControllerEvaluationError, OutOfDomainError
from safecompose.core.geometry import Box
from safecompose.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

TRUTH = "truth"
RANDOM = "random"
ADVERSARIAL = "adversarial"
DISTURBANCE_MODES = (TRUTH, RANDOM, ADVERSARIAL)

GOAL = "goal"
VIOLATION = "violation"
LEFT_DOMAIN = "left_domain"
NO_ACTIVATION = "no_activation"
MISSING_POLICY = "missing_policy"
HORIZON = "horizon"


class Disturbance:
    """
    Additive error injected at every step: the configured model error,
    a uniform sample from ``D`` or a random corner of ``D``
    """

    def __init__(self, mode: str, bound: Optional[Box] = None, truth=None, rng=None):
        if mode not in DISTURBANCE_MODES:
            raise ConfigurationError(
                "unknown disturbance mode %r; choose one of %s" % (mode, ", ".join(DISTURBANCE_MODES))
            )
        if mode != TRUTH and bound is None:
            raise ConfigurationError("disturbance mode %r needs the bound D" % mode)
        self.mode = mode
        self.bound = bound
        self.truth = truth
        self.rng = rng if rng is not None else np.random.default_rng()
        self._corners = bound.corners() if bound is not None else None

    def __call__(self, x, u) -> np.ndarray:
        if self.mode == TRUTH:
            if self.truth is None:
                return np.zeros_like(x)
            return np.asarray(self.truth(x, u), dtype=float)
        if self.mode == RANDOM:
            return self.rng.uniform(self.bound.lo, self.bound.hi)
        return self._corners[self.rng.integers(len(self._corners))]


@dataclass
class RolloutReport:
    task: str
    trajectory: Trajectory
    #: activation key applied at every step
    keys: List = field(default_factory=list)
    #: the terminal cause; exactly one per rollout
    outcome: str = HORIZON
    #: step index of the terminal event
    outcome_step: int = 0
    seed: int = 0
    #: keys trained online during this rollout, with their training time
    online: List = field(default_factory=list)
    seconds: float = 0.0

    @property
    def reached_goal(self) -> bool:
        return self.outcome == GOAL

    @property
    def safety_violation(self) -> bool:
        return self.outcome == VIOLATION

    @property
    def steps(self) -> int:
        return self.trajectory.steps

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "outcome": self.outcome,
            "outcome_step": self.outcome_step,
            "reached_goal": self.reached_goal,
            "safety_violation": self.safety_violation,
            "states": self.trajectory.state_array().tolist(),
            "inputs": self.trajectory.input_array().tolist(),
            "keys": [k.to_list() if k is not None else None for k in self.keys],
            "online": [{"key": key.to_list(), "seconds": seconds} for key, seconds in self.online],
            "seconds": self.seconds,
        }


def _monitor(task, x) -> Optional[str]:
    if task.in_obstacle(x):
        return VIOLATION
    if task.in_goal(x):
        return GOAL
    return None


def execute(
    x0,
    task,
    mdp,
    store,
    activation,
    model,
    *,
    disturbance: Optional[Disturbance] = None,
    seed: int = 0,
    horizon: Optional[int] = None,
    resolver: Optional[Callable] = None,
) -> RolloutReport:
    """
    Step the true system under ``u = NN_{Gamma_k(x)}(x)`` until the goal,
    an obstacle, a controller-domain exit or the horizon

    ``resolver(key)`` supplies the network of a key; by default the store
    is looked up and a missing key ends the rollout.
    """
    horizon = task.horizon if horizon is None else horizon
    partition = mdp.partition
    x = model.wrap(np.asarray(x0, dtype=float))
    if partition.locate(x) is None:
        raise OutOfDomainError("initial state %s lies outside the state domain" % x)
    resolver = resolver or store.get
    disturbance = disturbance or Disturbance(TRUTH)
    started = time.perf_counter()
    report = RolloutReport(task=task.name, trajectory=Trajectory(states=[x]), seed=seed)

    outcome = _monitor(task, x)
    k = 0
    while outcome is None and k < horizon:
        q = partition.locate(x)
        if q is None:
            outcome = LEFT_DOMAIN
            break
        key = activation.key_for(k, q)
        if key is None:
            outcome = NO_ACTIVATION
            break
        net = resolver(key)
        if net is None:
            outcome = MISSING_POLICY
            break
        u = np.atleast_1d(net(x))
        if not np.all(np.isfinite(u)):
            raise ControllerEvaluationError("non-finite input %s from %s" % (u, key), step=k)
        x = model.wrap(model.evaluate(x, u) + disturbance(x, u))
        report.keys.append(key)
        report.trajectory.inputs.append(u)
        report.trajectory.states.append(x)
        k += 1
        outcome = _monitor(task, x)

    report.outcome = outcome or HORIZON
    report.outcome_step = k
    report.seconds = time.perf_counter() - started
    if report.safety_violation:
        logger.error("task %s: rollout %d entered an obstacle at step %d", task.name, seed, k)
    else:
        logger.debug("task %s: rollout %d ended with %s at step %d", task.name, seed, report.outcome, k)
    return report


def run_batch(
    initial_states,
    task,
    mdp,
    store,
    activation,
    model,
    *,
    mode: str = TRUTH,
    bound: Optional[Box] = None,
    truth=None,
    seed: int = 0,
    horizon: Optional[int] = None,
    resolver: Optional[Callable] = None,
    rollout: Callable = execute,
) -> List[RolloutReport]:
    """
    One rollout per initial state; rollout ``i`` draws its disturbance
    from a generator seeded by ``(seed, task, i)``

    ``rollout`` runs a single rollout with the signature of :func:`execute`;
    ``resolver`` is passed on only when given.
    """
    options = {"horizon": horizon}
    if resolver is not None:
        options["resolver"] = resolver
    reports = []
    for index, x0 in enumerate(initial_states):
        rollout_seed = derive_seed(seed, "rollout", task.name, index)
        disturbance = Disturbance(mode, bound, truth, rng=np.random.default_rng(rollout_seed))
        reports.append(
            rollout(
                x0,
                task,
                mdp,
                store,
                activation,
                model,
                disturbance=disturbance,
                seed=rollout_seed,
                **options,
            )
        )
    violations = sum(r.safety_violation for r in reports)
    logger.info(
        "task %s: %d rollouts under %s disturbance, %d reached the goal, %d violations",
        task.name,
        len(reports),
        mode,
        sum(r.reached_goal for r in reports),
        violations,
    )
    return reports
