import numpy as np
import pytest

from safecompose.apps.abstraction.mdp import AbstractMDP
from safecompose.apps.abstraction.tests.factories import chain_mdp, two_route_mdp, random_mdp
from safecompose.apps.policies.store import LocalPolicyKey
from safecompose.apps.selection.liveness import dp_liveness
from safecompose.apps.selection.safety import backtrack_safety
from safecompose.apps.selection.tests.factories import TaskFactory, cell_cover, cell_interior


def exhaustive_value(mdp, sets, q, steps_left):
    """Best reach probability by expanding every safe partition choice along the history tree"""
    if sets.goal[q] and sets.safe[q]:
        return 1.0
    if steps_left == 0 or not sets.safe[q]:
        return 0.0
    best = 0.0
    for p in sets.p_safe(q):
        targets, probabilities = mdp.row(q, p)
        total = 0.0
        for target, probability in zip(targets, probabilities):
            if sets.safe[target]:
                total += probability * exhaustive_value(mdp, sets, int(target), steps_left - 1)
        best = max(best, total)
    return best


def solve(mdp, task):
    sets = backtrack_safety(mdp, task)
    activation, values = dp_liveness(mdp, sets, sets.goal, task.horizon)
    return sets, activation, values


class TestDPLiveness:
    def test_goal_cells_have_value_one(self):
        sets, _, values = solve(chain_mdp(4), TaskFactory(goal=cell_cover(3), horizon=4))
        assert np.all(values[:, 3] == 1.0)

    def test_two_route_prefers_the_certain_two_step_route(self):
        sets, activation, values = solve(two_route_mdp(), TaskFactory(goal=cell_cover(3), horizon=2))
        assert values[0, 0] == 1.0
        assert activation.key_for(0, 0) == LocalPolicyKey(0, 0, 1)
        assert activation.key_for(1, 1) == LocalPolicyKey(1, 0, 3)
        # one step from the end only the direct route scores
        assert values[1, 0] == 0.1

    def test_two_route_obstacle_task(self):
        task = TaskFactory(goal=cell_cover(3), obstacles=[cell_interior(1)], horizon=3)
        _, activation, values = solve(two_route_mdp(), task)
        assert activation.key_for(0, 0) == LocalPolicyKey(0, 1, 3)
        assert values[0, 0] == 0.1

    def test_chain_longer_than_the_horizon_has_value_zero(self):
        _, _, values = solve(chain_mdp(6), TaskFactory(goal=cell_cover(5), horizon=4))
        assert values[0, 0] == 0.0
        _, _, values = solve(chain_mdp(6), TaskFactory(goal=cell_cover(5), horizon=5))
        assert values[0, 0] == 1.0

    def test_ties_go_to_the_lowest_id(self):
        partition = chain_mdp(3).partition
        grid = random_mdp(np.random.default_rng(0), num_states=3, num_actions=2).controller_grid
        rows = {(0, 0): {2: 0.5}, (0, 1): {2: 0.5}, (1, 0): {2: 0.5}, (2, 0): {2: 1.0}}
        mdp = AbstractMDP.from_transitions(partition, grid, rows)
        _, activation, _ = solve(mdp, TaskFactory(goal=cell_cover(2), horizon=1))
        assert activation.key_for(0, 0) == LocalPolicyKey(0, 0, 2)

    def test_target_is_the_most_likely_safe_successor(self):
        partition = chain_mdp(4).partition
        grid = chain_mdp(4).controller_grid
        rows = {(0, 0): {1: 0.25, 2: 0.5, 3: 0.25}, (1, 0): {3: 1.0}, (2, 0): {3: 1.0}, (3, 0): {3: 1.0}}
        mdp = AbstractMDP.from_transitions(partition, grid, rows)
        _, activation, _ = solve(mdp, TaskFactory(goal=cell_cover(3), horizon=2))
        assert activation.key_for(0, 0) == LocalPolicyKey(0, 0, 2)

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_exhaustive_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        mdp = random_mdp(rng, num_states=int(rng.integers(4, 17)), num_actions=int(rng.integers(1, 5)))
        horizon = int(rng.integers(1, 6))
        obstacles = [cell_interior(int(q)) for q in rng.choice(mdp.num_states, size=2, replace=False)]
        task = TaskFactory(goal=cell_cover(int(rng.integers(mdp.num_states))), obstacles=obstacles, horizon=horizon)
        sets, activation, values = solve(mdp, task)
        if sets.is_empty:
            return
        for q in range(mdp.num_states):
            assert values[0, q] == exhaustive_value(mdp, sets, q, horizon)

        # bounds and horizon monotonicity
        assert np.all((values.values >= 0.0) & (values.values <= 1.0))
        assert np.all(values[:-1] >= values[1:])

        # assignments use safe partitions and reachable targets
        for k in range(horizon):
            for q in sets.safe_ids:
                key = activation.key_for(k, int(q))
                if key is None:
                    continue
                assert sets.partitions[q, key.p]
                assert key.target in mdp.next_states(q, key.p)

    @pytest.mark.parametrize("seed", range(10))
    def test_scaling_the_rows_of_a_cell_keeps_its_choice(self, seed):
        rng = np.random.default_rng(seed)
        mdp = random_mdp(rng, num_states=8, num_actions=4)
        task = TaskFactory(goal=cell_cover(int(rng.integers(8))), horizon=3)
        _, activation, _ = solve(mdp, task)
        q = int(rng.integers(8))
        scaled = mdp.probabilities.copy()
        for p in range(mdp.num_actions):
            row = q * mdp.num_actions + p
            scaled[mdp.offsets[row]:mdp.offsets[row + 1]] *= 0.5
        rescaled = AbstractMDP(mdp.partition, mdp.controller_grid, mdp.offsets, mdp.targets, scaled)
        _, other, _ = solve(rescaled, task)
        last = task.horizon - 1
        assert other.key_for(last, q) == activation.key_for(last, q)
