import numpy as np
import pytest

from safecompose.apps.dynamics.systems import DubinsCar, ZeroModelError
from safecompose.core import intervals
from safecompose.core.exceptions import AppNotFoundError, ClassNotFoundError, ConfigurationError, IntervalDomainError
from safecompose.core.geometry import Box
from safecompose.core.intervals import Interval
from safecompose.core.loading import get_registered_class, load_class


class TestInterval:
    def test_empty_interval(self):
        with pytest.raises(IntervalDomainError):
            Interval([1.0], [0.0])

    def test_arithmetic_encloses_samples(self):
        rng = np.random.default_rng(0)
        a = Interval([-1.0, 2.0], [0.5, 3.0])
        b = Interval([-2.0, -1.0], [1.0, 4.0])
        result = a * b - a + 2.0
        xa = rng.uniform(a.lower, a.upper, size=(1000, 2))
        xb = rng.uniform(b.lower, b.upper, size=(1000, 2))
        values = xa * xb - xa + 2.0
        assert np.all(values >= result.lower) and np.all(values <= result.upper)

    def test_outward_rounding(self):
        widened = Interval([0.0], [1.0]).outward()
        assert widened.lower[0] < 0.0 and widened.upper[0] > 1.0

    @pytest.mark.parametrize("lo,hi", [(-0.5, 0.5), (0.5, 4.0), (2.0, 2.5), (-7.0, -6.0), (0.0, 7.0)])
    def test_cosine_range(self, lo, hi):
        grid = np.linspace(lo, hi, 10001)
        result = intervals.cos(Interval([lo], [hi]))
        assert result.lower[0] <= np.cos(grid).min() + 1e-12
        assert result.upper[0] >= np.cos(grid).max() - 1e-12
        assert result.lower[0] == pytest.approx(np.cos(grid).min(), abs=1e-6)
        assert result.upper[0] == pytest.approx(np.cos(grid).max(), abs=1e-6)

    def test_affine_feedback(self):
        gains = Interval([[-1.0, 0.0, 0.5]], [[1.0, 0.0, 1.0]])
        u = intervals.affine_feedback(gains, Interval([0.0, 0.0], [2.0, 1.0]))
        assert np.allclose(u.lower, [-1.5]) and np.allclose(u.upper, [3.0])

    def test_wrap_angle(self):
        assert intervals.wrap_angle(-1e-20) == 0.0
        assert intervals.wrap_angle(2 * np.pi + 0.5) == pytest.approx(0.5)


class TestBox:
    def test_basic_properties(self):
        box = Box([0.0, 1.0], [2.0, 2.0])
        assert np.allclose(box.center, [1.0, 1.5])
        assert box.volume == pytest.approx(2.0)
        assert len(box.corners()) == 4
        assert box.contains([2.0, 2.0]) and not box.contains([2.1, 1.0])

    def test_midpoints(self):
        nodes = Box([0.0], [1.0]).midpoints(4)
        assert np.allclose(nodes.ravel(), [0.125, 0.375, 0.625, 0.875])

    def test_inverted_box(self):
        with pytest.raises(ValueError):
            Box([1.0], [0.0])


class TestRegistries:
    def test_registered_class(self):
        assert get_registered_class("SAFECOMPOSE_DYNAMICS_MODELS", "dubins") is DubinsCar

    def test_unknown_name_lists_the_choices(self):
        with pytest.raises(ConfigurationError, match="choose one of: drift_integrator, dubins"):
            get_registered_class("SAFECOMPOSE_DYNAMICS_MODELS", "bicycle")

    def test_registry_override(self, settings):
        settings.SAFECOMPOSE_MODEL_ERRORS = {"still": "dynamics.systems.ZeroModelError"}
        assert get_registered_class("SAFECOMPOSE_MODEL_ERRORS", "still") is ZeroModelError

    @pytest.mark.parametrize(
        "label, error",
        [
            ("dynamics.systems.Bicycle", ClassNotFoundError),
            ("weather.systems.Wind", AppNotFoundError),
            ("contenttypes.models.ContentType", AppNotFoundError),
            ("dynamics.DubinsCar", ValueError),
        ],
    )
    def test_bad_labels(self, label, error):
        with pytest.raises(error):
            load_class(label)
