import numpy as np
import pytest

from safecompose.apps.dynamics.systems import ConstantModelError, ZeroModelError, check_disturbance_bound
from safecompose.apps.dynamics.tests.factories import (
    DriftIntegratorFactory,
    DubinsCarFactory,
    TrigonometricModelErrorFactory,
)
from safecompose.core.exceptions import DimensionMismatchError
from safecompose.core.geometry import Box
from safecompose.core.intervals import Interval


class TestDubinsCar:
    def test_straight_step(self):
        car = DubinsCarFactory()
        x = car.step([0.0, 0.0, 0.0], [0.0])
        assert np.allclose(x, [0.3, 0.0, 0.0])

    def test_heading_wraps(self):
        car = DubinsCarFactory()
        x = car.step([0.0, 0.0, 2 * np.pi - 0.05], [1.0])
        assert 0.0 <= x[2] < 2 * np.pi
        assert x[2] == pytest.approx(0.05)

    def test_batches(self):
        car = DubinsCarFactory()
        x = np.zeros((5, 3))
        u = np.ones((5, 1))
        assert car.step(x, u).shape == (5, 3)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatchError):
            DubinsCarFactory().step([0.0, 0.0], [0.0])
        with pytest.raises(DimensionMismatchError):
            DubinsCarFactory().step([0.0, 0.0, 0.0], [0.0, 1.0])

    def test_nonpositive_time_step(self):
        with pytest.raises(ValueError):
            DubinsCarFactory(dt=0.0)

    def test_interval_encloses_samples(self):
        car = DubinsCarFactory()
        rng = np.random.default_rng(0)
        state = Box([1.0, 2.0, 5.9], [1.5, 2.5, 6.6])
        inputs = Box([-1.0], [1.0])
        reach = car.step_interval(Interval.from_box(state), Interval.from_box(inputs))
        images = car.evaluate(state.sample(rng, 2000), inputs.sample(rng, 2000))
        assert np.all(images >= reach.lower - 1e-12)
        assert np.all(images <= reach.upper + 1e-12)

    def test_jacobian_bounds(self):
        car = DubinsCarFactory()
        jac_x, jac_u = car.jacobian_bounds(Interval([0.0, 0.0, 0.0], [1.0, 1.0, 0.1]), Interval([0.0], [1.0]))
        assert jac_x.contains(np.array([[1, 0, -0.3 * np.sin(0.05)], [0, 1, 0.3 * np.cos(0.05)], [0, 0, 1]]))
        assert np.allclose(jac_u.lower, [[0.0], [0.0], [0.1]])

    def test_lipschitz_constants(self):
        car = DubinsCarFactory()
        lx, lu = car.lipschitz_constants(Interval([0.0, 0.0, 0.0], [1.0, 1.0, 2 * np.pi]), Interval([-1.0], [1.0]))
        assert lx >= 1.0
        assert lu == pytest.approx(0.1)

    def test_repr(self):
        assert repr(DubinsCarFactory()) == "DubinsCar(dt=0.1, speed=3.0)"


class TestDriftIntegrator:
    def test_step(self):
        model = DriftIntegratorFactory()
        assert np.allclose(model.step([0.5, 0.5], [-1.0]), [0.6, 0.4])

    def test_interval_is_exact(self):
        model = DriftIntegratorFactory()
        reach = model.step_interval(Interval([0.0, 0.0], [0.5, 0.5]), Interval([-1.0], [1.0]))
        assert np.allclose(reach.lower, [0.1, -0.1])
        assert np.allclose(reach.upper, [0.6, 0.6])


class TestModelErrors:
    def test_zero(self):
        assert np.all(ZeroModelError()(np.ones((3, 2)), np.ones((3, 1))) == 0.0)

    def test_constant_broadcasts(self):
        error = ConstantModelError([0.01, 0.02])
        assert np.allclose(error(np.zeros((4, 2)), np.zeros((4, 1))), [[0.01, 0.02]] * 4)

    def test_constant_dimension(self):
        with pytest.raises(DimensionMismatchError):
            ConstantModelError([0.01])(np.zeros(2), np.zeros(1))

    def test_trigonometric_range(self):
        error = TrigonometricModelErrorFactory()
        rng = np.random.default_rng(3)
        values = error(rng.uniform(-10, 10, size=(1000, 3)), np.zeros((1000, 1)))
        assert np.all((values[:, :2] >= 0.0) & (values[:, :2] <= 0.05))
        assert np.all(values[:, 2] == 0.0)


class TestDisturbanceBound:
    def test_sound_bound(self):
        fraction = check_disturbance_bound(
            TrigonometricModelErrorFactory(),
            Box([0.0, 0.0, 0.0], [0.05, 0.05, 0.0]),
            Box([0.0, 0.0, 0.0], [10.0, 10.0, 6.0]),
            Box([-1.0], [1.0]),
            np.random.default_rng(0),
            samples=1000,
        )
        assert fraction == 0.0

    def test_violated_bound_warns(self, caplog):
        fraction = check_disturbance_bound(
            TrigonometricModelErrorFactory(),
            Box([0.0, 0.0, 0.0], [0.01, 0.01, 0.0]),
            Box([0.0, 0.0, 0.0], [10.0, 10.0, 6.0]),
            Box([-1.0], [1.0]),
            np.random.default_rng(0),
            samples=1000,
        )
        assert fraction > 0.0
        assert "leaves the declared bound" in caplog.text
