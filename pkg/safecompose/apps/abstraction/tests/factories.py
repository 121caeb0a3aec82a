import factory
import numpy as np

from safecompose.apps.abstraction.mdp import AbstractMDP, build_mdp
from safecompose.apps.abstraction.partitions import ControllerGrid, StatePartition
from safecompose.apps.dynamics.systems import DriftIntegrator
from safecompose.apps.gp.datasets import ResidualDataset
from safecompose.apps.gp.regression import KernelHyperparameters, fit
from safecompose.core.geometry import Box


class BoxFactory(factory.Factory):
    lo = (0.0, 0.0)
    hi = (1.0, 1.0)

    class Meta:
        model = Box


class StatePartitionFactory(factory.Factory):
    domain = factory.SubFactory(BoxFactory, hi=(2.0, 2.0))
    counts = (4, 4)
    periodic_dims = ()

    class Meta:
        model = StatePartition


class ControllerGridFactory(factory.Factory):
    """One gain entry per state plus an offset, for a single input"""

    global_box = factory.LazyFunction(lambda: Box([0.0, 0.0, -1.0], [0.0, 0.0, 1.0]))
    counts = (1, 1, 2)
    state_dim = 2
    input_dim = 1

    class Meta:
        model = ControllerGrid


def two_route_mdp() -> AbstractMDP:
    """
    Four cells on ``[0, 4]``, two partitions (``u = b`` with ``b`` in
    ``[-1, 0]`` or ``[0, 1]``) and nine transitions::

        (q0, P0) -> q1: 1            (q0, P1) -> q3: 0.1
        (q1, P0) -> q3: 1            (q1, P1) -> q0: 0.5, q1: 0.25, q2: 0.25
        (q3, P0) -> q3: 1            (q3, P1) -> q2: 0.5, q3: 0.5

    ``q2`` has no outgoing transition.
    """
    partition = StatePartition(Box([0.0], [4.0]), (4,))
    grid = ControllerGrid(Box([0.0, -1.0], [0.0, 1.0]), (1, 2), state_dim=1, input_dim=1)
    rows = {
        (0, 0): {1: 1.0},
        (0, 1): {3: 0.1},
        (1, 0): {3: 1.0},
        (1, 1): {0: 0.5, 1: 0.25, 2: 0.25},
        (3, 0): {3: 1.0},
        (3, 1): {2: 0.5, 3: 0.5},
    }
    return AbstractMDP.from_transitions(partition, grid, rows)


def chain_mdp(length: int) -> AbstractMDP:
    """Deterministic chain ``q0 -> q1 -> ... -> q_{length-1}`` with one partition"""
    partition = StatePartition(Box([0.0], [float(length)]), (length,))
    grid = ControllerGrid(Box([0.0, 0.0], [0.0, 1.0]), (1, 1), state_dim=1, input_dim=1)
    rows = {(q, 0): {min(q + 1, length - 1): 1.0} for q in range(length)}
    return AbstractMDP.from_transitions(partition, grid, rows)


def random_mdp(rng, num_states=16, num_actions=4, max_support=3) -> AbstractMDP:
    """
    Random MDP on a 1-D grid whose probabilities are multiples of 1/8,
    so sums of products are exact in floating point
    """
    partition = StatePartition(Box([0.0], [float(num_states)]), (num_states,))
    grid = ControllerGrid(
        Box([0.0, 0.0], [0.0, float(num_actions)]), (1, num_actions), state_dim=1, input_dim=1
    )
    rows = {}
    for q in range(num_states):
        for p in range(num_actions):
            size = int(rng.integers(0, max_support + 1))
            if size == 0:
                continue
            targets = rng.choice(num_states, size=size, replace=False)
            weights = rng.integers(0, 9, size=size)
            weights[0] = max(weights[0], 1)
            while weights.sum() > 8:
                weights[int(np.argmax(weights))] -= 1
            rows[(q, p)] = {int(t): w / 8.0 for t, w in zip(targets, weights)}
    return AbstractMDP.from_transitions(partition, grid, rows)


def drift_instance(signal_variance=1e-4, disturbance=0.02):
    """
    Drift integrator on ``[0, 2]^2`` with a 4 x 4 grid, two offset
    partitions and the prior GP (no residual data)
    """
    model = DriftIntegrator(drift=1.0, dt=0.1)
    partition = StatePartitionFactory()
    grid = ControllerGridFactory()
    hyper = KernelHyperparameters(signal_variance, [1.0], 1e-6)
    gp = fit(ResidualDataset.empty(2, 1), hyper)
    bound = Box([0.0, 0.0], [disturbance, disturbance])
    mdp = build_mdp(partition, grid, model, gp, bound)
    return mdp, model, gp, bound
