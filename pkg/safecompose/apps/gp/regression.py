"""
Independent squared-exponential Gaussian processes, one per output
dimension of the model error
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import GPy
import numpy as np

from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import DimensionMismatchError, GPFitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelHyperparameters:
    signal_variance: float
    lengthscales: Sequence[float]
    noise_variance: float

    def __post_init__(self):
        if self.signal_variance <= 0:
            raise ValueError("signal variance must be positive")
        if any(scale <= 0 for scale in self.lengthscales):
            raise ValueError("lengthscales must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be nonnegative")

    def lengthscale_vector(self, input_dim: int) -> np.ndarray:
        scales = np.asarray(self.lengthscales, dtype=float)
        if scales.size == 1:
            return np.full(input_dim, float(scales[0]))
        if scales.size != input_dim:
            raise DimensionMismatchError(
                "%d lengthscales for %d inputs" % (scales.size, input_dim)
            )
        return scales


@dataclass(frozen=True)
class PosteriorStats:
    mean: np.ndarray
    variance: np.ndarray


class ScalarGP:
    """
    GPy regression of a single output with an ARD squared-exponential
    kernel; the hyperparameters are fixed, never optimised
    """

    def __init__(self, inputs, targets, signal_variance, lengthscales, noise_variance):
        self.signal_variance = signal_variance
        self.lengthscales = np.asarray(lengthscales, dtype=float)
        self.noise_variance = noise_variance
        self.model = None
        if len(inputs) == 0:
            return
        kernel = GPy.kern.RBF(
            input_dim=inputs.shape[1],
            variance=signal_variance,
            lengthscale=self.lengthscales,
            ARD=True,
        )
        try:
            self.model = GPy.models.GPRegression(
                inputs, np.reshape(targets, (-1, 1)), kernel, noise_var=noise_variance
            )
        except np.linalg.LinAlgError as error:
            raise GPFitError(
                "Cholesky factorisation of the Gram matrix failed: %s" % error,
                suggested_noise_floor=max(10.0 * noise_variance, 1e-6),
            ) from error
        self.model.fix()

    @property
    def weights(self) -> np.ndarray:
        """``(K + s_n^2 I)^{-1} y``"""
        if self.model is None:
            return np.zeros(0)
        return self.model.posterior.woodbury_vector[:, 0]

    def predict(self, queries):
        if self.model is None:
            return np.zeros(len(queries)), np.full(len(queries), self.signal_variance)
        mean, variance = self.model.predict_noiseless(queries)
        return mean[:, 0], variance[:, 0]

    def mean_gradient_bound(self) -> np.ndarray:
        """
        Upper bound on ``|d mean / d z_j|`` over the whole input space

        For the squared-exponential kernel ``|dk/dz_j| <= s^2 e^{-1/2} / l_j``.
        """
        total = float(np.sum(np.abs(self.weights)))
        return total * self.signal_variance * np.exp(-0.5) / self.lengthscales


class GPModel:
    """
    Posterior of ``g`` with one independent :class:`ScalarGP` per state
    dimension; immutable once fitted
    """

    def __init__(self, outputs: List[ScalarGP], hyper: KernelHyperparameters, state_dim, input_dim):
        self.outputs = outputs
        self.hyper = hyper
        self.state_dim = state_dim
        self.input_dim = input_dim

    def predict(self, queries):
        """Batch posterior: ``(means, variances)`` each of shape ``(N, n)``"""
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        if queries.shape[1] != self.state_dim + self.input_dim:
            raise DimensionMismatchError(
                "queries have %d columns, expected %d"
                % (queries.shape[1], self.state_dim + self.input_dim)
            )
        means, variances = zip(*(gp.predict(queries) for gp in self.outputs))
        means = np.stack(means, axis=1)
        variances = np.stack(variances, axis=1)
        tolerance = get_app_setting("gp", "variance_tolerance")
        if np.any(variances < -tolerance):
            logger.warning(
                "posterior variance %.3e below zero beyond round-off; clamping",
                float(variances.min()),
            )
        return means, np.maximum(variances, 0.0)

    def posterior(self, x, u) -> PosteriorStats:
        z = np.concatenate([np.atleast_1d(x), np.atleast_1d(u)])
        means, variances = self.predict(z[None, :])
        return PosteriorStats(mean=means[0], variance=variances[0])

    def mean(self, x, u) -> np.ndarray:
        """Posterior mean on batches ``x`` (..., n), ``u`` (..., m)"""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        z = np.concatenate([x, u], axis=-1)
        means, _ = self.predict(z.reshape(-1, z.shape[-1]))
        return means.reshape(x.shape)

    def mean_gradient_bound(self) -> np.ndarray:
        """``(n, n + m)`` bounds on the partial derivatives of the mean"""
        return np.stack([gp.mean_gradient_bound() for gp in self.outputs])


def fit(data, hyper: KernelHyperparameters, noise_floor: Optional[float] = None) -> GPModel:
    if noise_floor is None:
        noise_floor = get_app_setting("gp", "noise_floor")
    noise = max(hyper.noise_variance, noise_floor)
    lengthscales = hyper.lengthscale_vector(data.inputs.shape[1])
    outputs = [
        ScalarGP(data.inputs, data.residuals[:, dim], hyper.signal_variance, lengthscales, noise)
        for dim in range(data.state_dim)
    ]
    logger.info(
        "fitted %d output GPs on %d points (noise variance %.1e)",
        len(outputs),
        len(data),
        noise,
    )
    return GPModel(outputs, hyper, data.state_dim, data.input_dim)
