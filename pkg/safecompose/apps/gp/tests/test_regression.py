import numpy as np
import pytest

from safecompose.apps.gp.regression import fit
from safecompose.apps.gp.tests.factories import KernelHyperparametersFactory, ResidualDatasetFactory
from safecompose.apps.gp.datasets import ResidualDataset
from safecompose.core.exceptions import DimensionMismatchError


class TestHyperparameters:
    @pytest.mark.parametrize(
        "field,value", [("signal_variance", 0.0), ("lengthscales", (0.5, -1.0)), ("noise_variance", -1e-3)]
    )
    def test_invalid(self, field, value):
        with pytest.raises(ValueError):
            KernelHyperparametersFactory(**{field: value})

    def test_lengthscale_vector(self):
        assert np.allclose(KernelHyperparametersFactory().lengthscale_vector(3), [0.5, 0.5, 0.5])
        with pytest.raises(DimensionMismatchError):
            KernelHyperparametersFactory(lengthscales=(1.0, 2.0)).lengthscale_vector(3)


class TestFit:
    def test_prior(self):
        model = fit(ResidualDataset.empty(2, 1), KernelHyperparametersFactory())
        means, variances = model.predict(np.zeros((4, 3)))
        assert np.all(means == 0.0)
        assert np.allclose(variances, 1e-2)
        assert np.all(model.mean_gradient_bound() == 0.0)

    def test_interpolates_training_data(self):
        data = ResidualDatasetFactory()
        model = fit(data, KernelHyperparametersFactory(signal_variance=1.0, lengthscales=(1.0,)))
        means, variances = model.predict(data.inputs)
        assert np.allclose(means, data.residuals, atol=1e-3)
        assert np.all(variances < 1e-3)

    def test_variance_grows_away_from_data(self):
        model = fit(ResidualDatasetFactory(), KernelHyperparametersFactory())
        _, near = model.predict(np.zeros((1, 3)))
        _, far = model.predict(np.full((1, 3), 50.0))
        assert np.all(far > near)
        assert np.allclose(far, 1e-2)

    def test_noise_floor(self):
        model = fit(ResidualDatasetFactory(), KernelHyperparametersFactory(noise_variance=0.0), noise_floor=1e-4)
        assert model.outputs[0].noise_variance == 1e-4

    def test_query_dimension(self):
        model = fit(ResidualDatasetFactory(), KernelHyperparametersFactory())
        with pytest.raises(DimensionMismatchError):
            model.predict(np.zeros((1, 2)))

    def test_gradient_bound_dominates_finite_differences(self):
        model = fit(ResidualDatasetFactory(), KernelHyperparametersFactory(signal_variance=1.0, lengthscales=(1.0,)))
        bound = model.mean_gradient_bound()
        rng = np.random.default_rng(2)
        step = 1e-5
        for z in rng.uniform(-3.0, 3.0, size=(20, 3)):
            for j in range(3):
                shift = np.zeros(3)
                shift[j] = step
                means, _ = model.predict(np.stack([z + shift, z - shift]))
                slope = np.abs(means[0] - means[1]) / (2 * step)
                assert np.all(slope <= bound[:, j] + 1e-6)

    def test_batch_mean(self):
        model = fit(ResidualDatasetFactory(), KernelHyperparametersFactory())
        x = np.zeros((2, 5, 2))
        u = np.zeros((2, 5, 1))
        assert model.mean(x, u).shape == (2, 5, 2)
        stats = model.posterior(np.zeros(2), np.zeros(1))
        assert stats.mean.shape == (2,) and stats.variance.shape == (2,)

    def test_matches_the_closed_form_posterior(self):
        data = ResidualDatasetFactory(size=12)
        hyper = KernelHyperparametersFactory(signal_variance=0.5, lengthscales=(0.8, 1.2, 2.0), noise_variance=1e-4)
        queries = np.random.default_rng(4).uniform(-2.0, 2.0, size=(7, 3))

        def kernel(a, b):
            diff = (a[:, None, :] - b[None, :, :]) / np.array([0.8, 1.2, 2.0])
            return 0.5 * np.exp(-0.5 * np.sum(diff ** 2, axis=-1))

        gram = kernel(data.inputs, data.inputs) + 1e-4 * np.eye(len(data))
        cross = kernel(queries, data.inputs)
        expected_mean = cross @ np.linalg.solve(gram, data.residuals)
        expected_variance = 0.5 - np.sum(cross * np.linalg.solve(gram, cross.T).T, axis=1)

        means, variances = fit(data, hyper).predict(queries)
        assert np.allclose(means, expected_mean, rtol=1e-6, atol=1e-10)
        assert np.allclose(variances, expected_variance[:, None], rtol=1e-6, atol=1e-10)


class TestPosteriorProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_another_point_never_increases_the_variance(self, seed):
        data = ResidualDatasetFactory(size=15, seed=seed)
        fewer = ResidualDataset(data.inputs[:-1], data.residuals[:-1], data.state_dim)
        hyper = KernelHyperparametersFactory(signal_variance=1.0, lengthscales=(1.0,))
        queries = np.random.default_rng(100 + seed).uniform(-3.0, 3.0, size=(50, 3))
        _, with_point = fit(data, hyper).predict(queries)
        _, without_point = fit(fewer, hyper).predict(queries)
        assert np.all(with_point <= without_point + 1e-9)

    def test_permuting_outputs_permutes_the_posteriors(self):
        inputs = np.random.default_rng(5).uniform(-2.0, 2.0, size=(20, 3))
        residuals = np.column_stack([0.1 * np.sin(inputs[:, 0]), 0.05 * np.cos(inputs[:, 1])])
        hyper = KernelHyperparametersFactory()
        queries = np.random.default_rng(6).uniform(-2.0, 2.0, size=(10, 3))
        means, variances = fit(ResidualDataset(inputs, residuals, 2), hyper).predict(queries)
        swapped_means, swapped_variances = fit(ResidualDataset(inputs, residuals[:, ::-1], 2), hyper).predict(queries)
        assert np.array_equal(swapped_means, means[:, ::-1])
        assert np.array_equal(swapped_variances, variances[:, ::-1])

    def test_midpoint_of_symmetric_targets_has_zero_mean(self):
        inputs = np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        residuals = np.array([[0.3, 0.3], [-0.3, -0.3]])
        model = fit(ResidualDataset(inputs, residuals, 2), KernelHyperparametersFactory(lengthscales=(1.0,)))
        means, _ = model.predict(np.zeros((1, 3)))
        assert np.all(np.abs(means) < 1e-6)
