from dataclasses import dataclass

import numpy as np

from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import ConfigurationError


@dataclass(frozen=True)
class TransferWeights:
    """Weights of the source-cell, target-cell and partition center distances"""

    cell: float = 1.0
    target: float = 1.0
    partition: float = 1.0

    def __post_init__(self):
        values = (self.cell, self.target, self.partition)
        if any(w < 0 for w in values):
            raise ConfigurationError("transfer weights must be nonnegative, got %s" % (values,))
        if not any(w > 0 for w in values):
            raise ConfigurationError("at least one transfer weight must be positive")

    @classmethod
    def from_app_settings(cls) -> "TransferWeights":
        return cls(*get_app_setting("transfer", "weights"))

    def to_list(self):
        return [self.cell, self.target, self.partition]


def distance(first, second, mdp, weights: TransferWeights) -> float:
    """
    Weighted center distance between two transitions: Euclidean between
    source cells and between target cells, max-norm between partitions
    """
    centers = mdp.partition.centers
    partitions = mdp.controller_grid.centers
    return float(
        weights.cell * np.linalg.norm(centers[first.q] - centers[second.q])
        + weights.target * np.linalg.norm(centers[first.target] - centers[second.target])
        + weights.partition * np.max(np.abs(partitions[first.p] - partitions[second.p]), initial=0.0)
    )
