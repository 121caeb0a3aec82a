from dataclasses import dataclass

import numpy as np

from safecompose.core.exceptions import DimensionMismatchError


@dataclass
class ShallowReluNet:
    """
    ``u = W2 max(W1 x + b1, 0) + b2`` with a single hidden layer
    """

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        self.W1 = np.array(self.W1, dtype=float, ndmin=2)
        self.b1 = np.array(self.b1, dtype=float).ravel()
        self.W2 = np.array(self.W2, dtype=float, ndmin=2)
        self.b2 = np.array(self.b2, dtype=float).ravel()
        hidden = self.W1.shape[0]
        if self.b1.shape != (hidden,) or self.W2.shape[1] != hidden:
            raise DimensionMismatchError(
                "inconsistent hidden width: W1 %s, b1 %s, W2 %s"
                % (self.W1.shape, self.b1.shape, self.W2.shape)
            )
        if self.b2.shape != (self.W2.shape[0],):
            raise DimensionMismatchError("b2 has shape %s, W2 %s" % (self.b2.shape, self.W2.shape))

    @classmethod
    def initialise(cls, state_dim, input_dim, hidden_width, rng, scale=None) -> "ShallowReluNet":
        """Uniform fan-in initialisation"""
        first = 1.0 / np.sqrt(state_dim) if scale is None else scale
        second = 1.0 / np.sqrt(hidden_width) if scale is None else scale
        return cls(
            W1=rng.uniform(-first, first, (hidden_width, state_dim)),
            b1=rng.uniform(-first, first, hidden_width),
            W2=rng.uniform(-second, second, (input_dim, hidden_width)),
            b2=np.zeros(input_dim),
        )

    @property
    def state_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def input_dim(self) -> int:
        return self.W2.shape[0]

    @property
    def hidden_width(self) -> int:
        return self.W1.shape[0]

    def pre_activation(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.W1.T + self.b1

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.state_dim:
            raise DimensionMismatchError(
                "network expects %d inputs, got %d" % (self.state_dim, x.shape[-1])
            )
        return np.maximum(self.pre_activation(x), 0.0) @ self.W2.T + self.b2

    __call__ = forward

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in (self.W1, self.b1, self.W2, self.b2))

    def copy(self) -> "ShallowReluNet":
        return ShallowReluNet(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    def max_difference(self, other: "ShallowReluNet") -> float:
        return max(
            float(np.max(np.abs(a - b))) if a.size else 0.0
            for a, b in zip(
                (self.W1, self.b1, self.W2, self.b2), (other.W1, other.b1, other.W2, other.b2)
            )
        )

    def to_dict(self) -> dict:
        return {
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShallowReluNet":
        return cls(data["W1"], data["b1"], data["W2"], data["b2"])
