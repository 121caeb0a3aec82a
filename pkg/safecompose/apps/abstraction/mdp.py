import io
import logging
from pathlib import Path
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from safecompose.apps.abstraction.kernels import cell_probabilities
from safecompose.apps.abstraction.partitions import ControllerGrid, StatePartition
from safecompose.apps.abstraction.reachability import next_states, post_overapprox
from safecompose.core.application import get_app_setting
from safecompose.core.base_models import ArtifactWithMetadata, StampedArtifact
from safecompose.core.exceptions import MissingArtifactError
from safecompose.core.geometry import Box
from safecompose.utils.files import atomic_write, dump_json, load_json

logger = logging.getLogger(__name__)

ARRAYS_FILE = "mdp.npz"
META_FILE = "mdp.json"


class AbstractMDP(StampedArtifact, ArtifactWithMetadata):
    """
    Finite MDP over abstract states (cells) and controller partitions

    For every pair ``(q, P)`` the row stores ``Next(q, P)`` as sorted
    target ids together with ``T(q' | q, P)``; the probability of every
    cell outside ``Next(q, P)`` is zero and the row deficit ``1 - sum``
    is failure mass. Rows are laid out ``q * M + P``.
    """

    def __init__(
        self,
        partition: StatePartition,
        controller_grid: ControllerGrid,
        offsets,
        targets,
        probabilities,
        leaves_domain=None,
        means=None,
        variances=None,
    ):
        self.partition = partition
        self.controller_grid = controller_grid
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.probabilities = np.asarray(probabilities, dtype=float)
        rows = self.num_states * self.num_actions
        if self.offsets.shape != (rows + 1,):
            raise ValueError("expected %d row offsets, got %d" % (rows + 1, len(self.offsets)))
        if self.targets.shape != self.probabilities.shape:
            raise ValueError("targets and probabilities differ in length")
        self.leaves_domain = (
            np.zeros(rows, dtype=bool) if leaves_domain is None else np.asarray(leaves_domain, bool)
        )
        self.means = means
        self.variances = variances
        self.metadata = {}

    @property
    def num_states(self) -> int:
        return len(self.partition)

    @property
    def num_actions(self) -> int:
        return len(self.controller_grid)

    @property
    def state_dim(self) -> int:
        return self.partition.dim

    @property
    def input_dim(self) -> int:
        return self.controller_grid.input_dim

    def _row(self, q: int, p: int) -> slice:
        row = q * self.num_actions + p
        return slice(self.offsets[row], self.offsets[row + 1])

    def next_states(self, q: int, p: int) -> np.ndarray:
        return self.targets[self._row(q, p)]

    def row(self, q: int, p: int) -> Tuple[np.ndarray, np.ndarray]:
        span = self._row(q, p)
        return self.targets[span], self.probabilities[span]

    def support(self, q: int, p: int) -> np.ndarray:
        targets, probabilities = self.row(q, p)
        return targets[probabilities > 0]

    def probability(self, q: int, p: int, target: int) -> float:
        targets, probabilities = self.row(q, p)
        position = np.searchsorted(targets, target)
        if position < len(targets) and targets[position] == target:
            return float(probabilities[position])
        return 0.0

    def row_sums(self) -> np.ndarray:
        rows = self.num_states * self.num_actions
        row_of_entry = np.repeat(np.arange(rows), np.diff(self.offsets))
        sums = np.bincount(row_of_entry, weights=self.probabilities, minlength=rows)
        return sums.reshape(self.num_states, self.num_actions)

    def transitions(self) -> Iterator[Tuple[int, int, int, float]]:
        """Every ``(q, P, q', T)`` with positive probability"""
        for q in range(self.num_states):
            for p in range(self.num_actions):
                targets, probabilities = self.row(q, p)
                for target, probability in zip(targets, probabilities):
                    if probability > 0:
                        yield q, p, int(target), float(probability)

    @classmethod
    def from_transitions(
        cls,
        partition: StatePartition,
        controller_grid: ControllerGrid,
        rows: Mapping[Tuple[int, int], Mapping[int, float]],
    ) -> "AbstractMDP":
        """
        Build an MDP from ``{(q, P): {q': T}}``; the keys of each inner
        mapping form ``Next(q, P)`` and missing pairs have empty rows
        """
        offsets = [0]
        targets, probabilities = [], []
        for q in range(len(partition)):
            for p in range(len(controller_grid)):
                row = rows.get((q, p), {})
                for target in sorted(row):
                    targets.append(target)
                    probabilities.append(row[target])
                offsets.append(len(targets))
        return cls(partition, controller_grid, offsets, targets, probabilities)

    def save(self, directory: Union[str, Path]):
        directory = Path(directory)
        buffer = io.BytesIO()
        arrays: Dict[str, np.ndarray] = {
            "offsets": self.offsets,
            "targets": self.targets,
            "probabilities": self.probabilities,
            "leaves_domain": self.leaves_domain,
        }
        if self.means is not None:
            arrays["means"] = self.means
            arrays["variances"] = self.variances
        np.savez_compressed(buffer, **arrays)
        atomic_write(directory / ARRAYS_FILE, buffer.getvalue())
        meta = self.stamp_dict()
        meta.update(
            {
                "partition": self.partition.grid_spec(),
                "periodic_dims": list(self.partition.periodic_dims),
                "controller_grid": self.controller_grid.to_dict(),
                "metadata": self.metadata,
            }
        )
        meta["controller_grid"].pop("cells")
        dump_json(directory / META_FILE, meta)

    @classmethod
    def load(cls, directory: Union[str, Path], expected_hash: Optional[str] = None) -> "AbstractMDP":
        directory = Path(directory)
        if not (directory / META_FILE).exists() or not (directory / ARRAYS_FILE).exists():
            raise MissingArtifactError("no abstraction cached in %s" % directory)
        meta = load_json(directory / META_FILE)
        partition = StatePartition(
            Box.from_bounds(meta["partition"]["domain"]),
            meta["partition"]["counts"],
            meta["periodic_dims"],
        )
        controller_grid = ControllerGrid.from_dict(meta["controller_grid"])
        with np.load(directory / ARRAYS_FILE) as arrays:
            mdp = cls(
                partition,
                controller_grid,
                arrays["offsets"],
                arrays["targets"],
                arrays["probabilities"],
                arrays["leaves_domain"],
                arrays["means"] if "means" in arrays else None,
                arrays["variances"] if "variances" in arrays else None,
            )
        mdp.load_stamp(meta)
        mdp.metadata = meta.get("metadata", {})
        mdp.check_hash(expected_hash)
        return mdp


def _abstract_states(state_ids, partition, controller_grid, model, disturbance, means, variances):
    """Rows of the ``(q, P)`` pairs of ``state_ids``; pure, so chunks can run in parallel"""
    n_actions = len(controller_grid)
    rows = []
    for q in state_ids:
        state = partition.states[q]
        for controller in controller_grid.partitions:
            row = q * n_actions + controller.id
            postbox = post_overapprox(state.box, controller, model, disturbance)
            reachable = next_states(partition, postbox)
            rows.append(
                (
                    reachable,
                    cell_probabilities(partition, means[row], variances[row], reachable),
                    partition.leaves_domain(postbox),
                )
            )
    return rows


def build_mdp(
    partition: StatePartition,
    controller_grid: ControllerGrid,
    model,
    gp,
    disturbance: Box,
    workers: Optional[int] = None,
) -> AbstractMDP:
    """
    Over-approximate every ``Post(q, P)``, collect ``Next(q, P)`` and
    assign Gaussian probabilities at the cell and partition centers

    States are split into chunks abstracted by ``workers`` threads and
    merged in state order, so the result does not depend on ``workers``.
    """
    n_states, n_actions = len(partition), len(controller_grid)
    if workers is None:
        workers = get_app_setting("abstraction", "workers")
    chunk_size = max(1, get_app_setting("abstraction", "progress_every") // max(n_actions, 1))

    centers = np.repeat(partition.centers, n_actions, axis=0)
    gains = np.stack([p.center_matrix() for p in controller_grid.partitions])
    gains = np.tile(gains, (n_states, 1, 1))
    inputs = np.einsum("rmk,rk->rm", gains[:, :, :-1], centers) + gains[:, :, -1]
    means = model.evaluate(centers, inputs)
    if gp is not None:
        gp_means, variances = gp.predict(np.hstack([centers, inputs]))
        means = means + gp_means
    else:
        variances = np.zeros_like(means)

    chunks = [range(start, min(start + chunk_size, n_states)) for start in range(0, n_states, chunk_size)]
    results = Parallel(n_jobs=workers, prefer="threads")(
        delayed(_abstract_states)(chunk, partition, controller_grid, model, disturbance, means, variances)
        for chunk in chunks
    )

    offsets = [0]
    targets, probabilities, leaves = [], [], []
    for chunk, rows in zip(chunks, results):
        for reachable, row_probabilities, leaving in rows:
            targets.extend(reachable.tolist())
            probabilities.extend(row_probabilities.tolist())
            leaves.append(leaving)
            offsets.append(len(targets))
        logger.info("abstraction: %d / %d states", chunk.stop, n_states)

    leaves = np.asarray(leaves, dtype=bool)
    mdp = AbstractMDP(
        partition, controller_grid, offsets, targets, probabilities, leaves, means, variances
    )
    escaping = int(leaves.sum())
    if escaping:
        logger.warning("%d of %d rows can leave the state domain", escaping, len(leaves))
    logger.info(
        "built MDP with %d states x %d partitions, %d transitions",
        n_states,
        n_actions,
        len(targets),
    )
    return mdp
