import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from safecompose.core.exceptions import DimensionMismatchError
from safecompose.core.geometry import Box
from safecompose.utils.files import atomic_write

logger = logging.getLogger(__name__)


@dataclass
class ResidualDataset:
    """
    Rows of ``z = (x, u)`` and residuals ``r = x_next - f(x, u)``
    """

    inputs: np.ndarray
    residuals: np.ndarray
    state_dim: int

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float).reshape(len(self.inputs), -1)
        self.residuals = np.asarray(self.residuals, dtype=float).reshape(
            len(self.residuals), -1
        )
        if len(self.inputs) != len(self.residuals):
            raise DimensionMismatchError(
                "%d input rows but %d residual rows" % (len(self.inputs), len(self.residuals))
            )
        if len(self.residuals) and self.residuals.shape[1] != self.state_dim:
            raise DimensionMismatchError(
                "residuals have %d columns, expected %d"
                % (self.residuals.shape[1], self.state_dim)
            )
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.residuals))):
            raise ValueError("residual dataset contains non-finite entries")

    @classmethod
    def empty(cls, state_dim: int, input_dim: int) -> "ResidualDataset":
        return cls(
            np.zeros((0, state_dim + input_dim)), np.zeros((0, state_dim)), state_dim
        )

    def __len__(self):
        return len(self.inputs)

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1] - self.state_dim

    def header(self):
        n_z = self.inputs.shape[1]
        return ["z%d" % (i + 1) for i in range(n_z)] + [
            "r%d" % (i + 1) for i in range(self.state_dim)
        ]

    def to_csv(self, path: Union[str, Path]):
        buffer = io.StringIO()
        np.savetxt(
            buffer,
            np.hstack([self.inputs, self.residuals]),
            fmt="%.17g",
            delimiter=",",
            header=",".join(self.header()),
            comments="",
        )
        atomic_write(path, buffer.getvalue())

    @classmethod
    def from_csv(cls, path: Union[str, Path], state_dim: int) -> "ResidualDataset":
        with open(path) as handle:
            header = handle.readline().strip().split(",")
            data = np.loadtxt(handle, delimiter=",", ndmin=2)
        n_z = len(header) - state_dim
        if len(data) == 0:
            return cls(np.zeros((0, n_z)), np.zeros((0, state_dim)), state_dim)
        return cls(data[:, :n_z], data[:, n_z:], state_dim)


class UniformSampler:
    """Uniform sampling plan over ``state_box x input_box``"""

    def __init__(self, state_box: Box, input_box: Box):
        self.state_box = state_box
        self.input_box = input_box

    def sample(self, rng: np.random.Generator, count: int):
        return self.state_box.sample(rng, count), self.input_box.sample(rng, count)


def collect_residuals(model, truth, sampler, count: int, seed: int) -> ResidualDataset:
    """Sample transitions of the true system and record ``f`` residuals"""
    if count < 1:
        raise ValueError("count must be at least 1, got %r" % count)
    rng = np.random.default_rng(seed)
    x, u = sampler.sample(rng, count)
    x = model.wrap(x)
    nominal = model.evaluate(x, u)
    true_next = nominal + truth(x, u)
    residuals = true_next - nominal
    logger.info("collected %d residuals for %s", count, model.name)
    return ResidualDataset(np.hstack([x, u]), residuals, model.state_dim)
