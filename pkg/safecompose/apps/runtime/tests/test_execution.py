import numpy as np
import pytest

from safecompose.apps.policies.store import PolicyStore
from safecompose.apps.runtime import execution
from safecompose.apps.runtime.execution import Disturbance, execute, run_batch
from safecompose.apps.runtime.tests.factories import drift_setup
from safecompose.apps.selection.selection import safe_initial_samples
from safecompose.core.exceptions import ConfigurationError, ControllerEvaluationError, OutOfDomainError
from safecompose.core.geometry import Box
from safecompose.utils.seeding import derive_seed


@pytest.fixture(scope="module")
def setup():
    return drift_setup()


def run(setup, x0, **kwargs):
    kwargs.setdefault("disturbance", Disturbance("random", setup.bound, rng=np.random.default_rng(0)))
    return execute(
        x0, setup.task, setup.mdp, setup.store, setup.selection.activation, setup.model, **kwargs
    )


class TestDisturbance:
    def test_random_samples_stay_in_the_bound(self):
        bound = Box([0.0, 0.0], [0.02, 0.02])
        disturbance = Disturbance("random", bound, rng=np.random.default_rng(3))
        samples = np.array([disturbance(np.zeros(2), np.zeros(1)) for _ in range(200)])
        assert bound.contains_points(samples).all()

    def test_adversarial_picks_corners(self):
        bound = Box([0.0, 0.0], [0.02, 0.02])
        disturbance = Disturbance("adversarial", bound, rng=np.random.default_rng(3))
        corners = {tuple(c) for c in bound.corners()}
        for _ in range(20):
            assert tuple(disturbance(np.zeros(2), np.zeros(1))) in corners

    def test_truth_without_a_field_is_zero(self):
        np.testing.assert_array_equal(Disturbance("truth")(np.ones(2), np.zeros(1)), np.zeros(2))

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError):
            Disturbance("gusts", Box([0.0], [1.0]))

    def test_sampled_modes_need_the_bound(self):
        with pytest.raises(ConfigurationError):
            Disturbance("random")


class TestExecute:
    def test_start_inside_the_goal(self, setup):
        report = run(setup, [1.75, 1.0])
        assert report.reached_goal
        assert report.outcome_step == 0
        assert report.steps == 0

    def test_reaches_the_goal_through_the_assigned_cells(self, setup):
        report = run(setup, [0.75, 1.1])
        assert report.outcome == execution.GOAL
        assert report.outcome_step <= 8
        for x, key in zip(report.trajectory.states, report.keys):
            assert key.q == setup.mdp.partition.locate(x)

    def test_start_inside_an_obstacle_is_a_violation(self, setup):
        report = run(setup, [0.25, 0.75])
        assert report.safety_violation
        assert report.outcome_step == 0

    def test_unsafe_cell_has_no_activation(self, setup):
        report = run(setup, [0.25, 1.75])
        assert report.outcome == execution.NO_ACTIVATION

    def test_missing_network_ends_the_rollout(self, setup):
        report = execute(
            [0.75, 1.1], setup.task, setup.mdp, PolicyStore(), setup.selection.activation, setup.model
        )
        assert report.outcome == execution.MISSING_POLICY

    def test_start_outside_the_domain(self, setup):
        with pytest.raises(OutOfDomainError):
            run(setup, [3.0, 3.0])

    def test_non_finite_input(self, setup):
        with pytest.raises(ControllerEvaluationError) as error:
            run(setup, [0.75, 1.1], resolver=lambda key: (lambda x: np.array([np.nan])))
        assert error.value.step == 0

    def test_report_document(self, setup):
        data = run(setup, [0.75, 1.1]).to_dict()
        assert data["outcome"] == "goal"
        assert len(data["states"]) == len(data["keys"]) + 1
        assert data["online"] == []


class TestRunBatch:
    @pytest.mark.parametrize("mode", ["truth", "random", "adversarial"])
    def test_no_rollout_enters_an_obstacle(self, setup, mode):
        samples = safe_initial_samples(setup.selection, setup.mdp.partition, np.random.default_rng(11), 1000)
        reports = run_batch(
            samples,
            setup.task,
            setup.mdp,
            setup.store,
            setup.selection.activation,
            setup.model,
            mode=mode,
            bound=setup.bound,
            seed=5,
        )
        assert len(reports) == 1000
        assert not any(r.safety_violation for r in reports)
        for report in reports:
            states = report.trajectory.state_array()
            for obstacle in setup.task.obstacles:
                assert not obstacle.contains_points(states).any()

    def test_identical_seeds_give_identical_rollouts(self, setup):
        samples = safe_initial_samples(setup.selection, setup.mdp.partition, np.random.default_rng(2), 20)
        args = (samples, setup.task, setup.mdp, setup.store, setup.selection.activation, setup.model)
        first = run_batch(*args, mode="random", bound=setup.bound, seed=9)
        second = run_batch(*args, mode="random", bound=setup.bound, seed=9)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.trajectory.state_array(), b.trajectory.state_array())
            assert a.outcome == b.outcome
            assert a.seed == b.seed

    def test_rollout_hook_gets_the_derived_seeds(self, setup):
        calls = []

        def rollout(x0, *args, **kwargs):
            calls.append(kwargs)
            return execute(x0, *args, **kwargs)

        samples = safe_initial_samples(setup.selection, setup.mdp.partition, np.random.default_rng(4), 3)
        args = (samples, setup.task, setup.mdp, setup.store, setup.selection.activation, setup.model)
        hooked = run_batch(*args, mode="random", bound=setup.bound, seed=9, rollout=rollout)
        plain = run_batch(*args, mode="random", bound=setup.bound, seed=9)
        assert [c["seed"] for c in calls] == [derive_seed(9, "rollout", setup.task.name, i) for i in range(3)]
        assert all("resolver" not in c for c in calls)
        for a, b in zip(hooked, plain):
            np.testing.assert_array_equal(a.trajectory.state_array(), b.trajectory.state_array())
