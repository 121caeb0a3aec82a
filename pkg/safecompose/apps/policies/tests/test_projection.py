import numpy as np
import pytest

from safecompose.apps.policies.cpwa import nn_to_cpwa_over
from safecompose.apps.policies.networks import ShallowReluNet
from safecompose.apps.policies.projection import (
    containment_violation,
    project,
    project_with_certificate,
)
from safecompose.apps.policies.tests.factories import ShallowReluNetFactory
from safecompose.core.exceptions import DimensionMismatchError, ProjectionInfeasibleError
from safecompose.core.geometry import Box


class TestProjection:
    def test_compliant_network_is_returned_unchanged(self):
        net = ShallowReluNet(np.eye(2), [5.0, 5.0], [[0.1, -0.1]], [0.0])
        partition = Box([-1.0, -1.0, -5.0], [1.0, 1.0, 5.0])
        projected, certificate = project_with_certificate(net, partition, Box([0, 0], [1, 1]))
        assert certificate.stage == "compliant"
        assert projected.max_difference(net) <= 1e-12

    def test_single_region_gain_is_clamped_onto_the_partition(self):
        net = ShallowReluNet([[1.0]], [10.0], [[2.0]], [0.0])
        partition = Box([-1.0, 0.0], [1.0, 5.0])
        projected = project(net, partition, Box([0.0], [1.0]))
        region = nn_to_cpwa_over(projected, Box([0.0], [1.0])).regions[0]
        assert region.gain[0, 0] == pytest.approx(1.0, abs=1e-6)
        assert region.offset[0] == pytest.approx(5.0, abs=1e-6)

    @pytest.mark.parametrize("seed", range(8))
    def test_every_region_lands_inside_the_partition(self, seed):
        net = ShallowReluNetFactory(seed=seed)
        cell = Box([0.0, 0.0], [1.0, 1.0])
        partition = Box([-0.2, 0.1, -0.5], [0.2, 0.3, 0.5])
        projected, certificate = project_with_certificate(net, partition, cell)
        cpwa = nn_to_cpwa_over(projected, cell)
        assert containment_violation(cpwa, partition, 1) <= 1e-6
        assert certificate.max_violation <= 1e-6
        assert certificate.regions == len(cpwa)

    @pytest.mark.parametrize("seed", range(4))
    def test_sampled_jacobians_lie_in_the_partition(self, seed):
        net = ShallowReluNetFactory(seed=seed)
        cell = Box([0.0, 0.0], [1.0, 1.0])
        partition = Box([-0.2, 0.1, -0.5], [0.2, 0.3, 0.5])
        projected = project(net, partition, cell)
        step = 1e-5
        norms = np.linalg.norm(projected.W1, axis=1)
        checked = 0
        for x in cell.sample(np.random.default_rng(seed), 1000):
            kink = np.abs(projected.pre_activation(x)) / np.where(norms > 0, norms, 1.0)
            if np.any((norms > 0) & (kink < 10 * step)):
                continue
            gain = np.array(
                [(projected(x + step * e) - projected(x - step * e))[0] / (2 * step) for e in np.eye(2)]
            )
            offset = projected(x)[0] - gain @ x
            combined = np.append(gain, offset)
            assert np.all(combined >= partition.lo - 1e-6)
            assert np.all(combined <= partition.hi + 1e-6)
            checked += 1
        assert checked > 900

    def test_zero_feature_map_cannot_reach_a_nonzero_gain(self):
        net = ShallowReluNet(np.zeros((3, 1)), [1.0, 1.0, 1.0], [[1.0, 1.0, 1.0]], [0.0])
        with pytest.raises(ProjectionInfeasibleError):
            project(net, Box([1.0, -1.0], [2.0, 1.0]), Box([0.0], [1.0]))

    def test_partition_dimension_is_checked(self):
        net = ShallowReluNetFactory(seed=0)
        with pytest.raises(DimensionMismatchError):
            project(net, Box([0.0, 0.0], [1.0, 1.0]), Box([0.0, 0.0], [1.0, 1.0]))
