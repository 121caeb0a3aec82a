"""
Partial-store workflow: offline training restricted to one task's
activation map, and runtime gap filling by warm-starting a missing
network from the closest stored one
"""
import logging
import threading
from typing import List, Optional, Tuple

from safecompose.apps.policies.store import LocalPolicyKey, PolicyStore
from safecompose.apps.policies.training import train_key, train_keys
from safecompose.apps.runtime.execution import execute
from safecompose.apps.transfer.distance import TransferWeights, distance
from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import NoDonorPolicyError

logger = logging.getLogger(__name__)


def transfer_keys(selection) -> List[LocalPolicyKey]:
    """Step-0 keys of the safe non-goal cells of a selection"""
    return sorted(selection.activation.keys(steps=[0]))


def train_transfer(
    mdp, selection, model, gp, episodes: int, seed: int, *, trainer=None, store=None
) -> PolicyStore:
    """One network per safe cell, at the transition the task activates first"""
    keys = transfer_keys(selection)
    if not keys:
        logger.warning("task %s: no safe cell to train; the store stays empty", selection.task.name)
    store = train_keys(keys, mdp, model, gp, episodes, seed, trainer=trainer, store=store)
    logger.info("task %s: transfer store holds %d networks", selection.task.name, len(store))
    return store


def find_donor(
    key: LocalPolicyKey, store: PolicyStore, mdp, weights: TransferWeights
) -> Tuple[LocalPolicyKey, float]:
    """Closest stored key; the lowest key wins ties"""
    best, best_distance = None, float("inf")
    for candidate in store:
        d = distance(key, candidate, mdp, weights)
        if d < best_distance:
            best, best_distance = candidate, d
    if best is None:
        raise NoDonorPolicyError("no donor policy for %s: the store is empty" % key)
    return best, best_distance


class TransferExecutor:
    """
    Resolves activation keys to networks, training missing ones online

    A missing network starts from a copy of the closest stored network
    and is fine-tuned for ``episodes`` episodes, projected and inserted.
    Insertions are serialised so concurrent rollouts can share a store.
    """

    def __init__(
        self,
        store: PolicyStore,
        mdp,
        model,
        gp,
        *,
        episodes: Optional[int] = None,
        seed: int = 0,
        weights: Optional[TransferWeights] = None,
        trainer=None,
    ):
        self.store = store
        self.mdp = mdp
        self.model = model
        self.gp = gp
        self.episodes = get_app_setting("policies", "online_episodes") if episodes is None else episodes
        self.seed = seed
        self.weights = weights or TransferWeights.from_app_settings()
        self.trainer = trainer
        #: (key, training seconds) per online insertion
        self.events: List[Tuple[LocalPolicyKey, float]] = []
        self._lock = threading.Lock()

    def __call__(self, key: LocalPolicyKey):
        return self.ensure(key)

    def ensure(self, key: LocalPolicyKey):
        net = self.store.get(key)
        if net is not None:
            return net
        with self._lock:
            net = self.store.get(key)
            if net is not None:
                return net
            donor, gap = find_donor(key, self.store, self.mdp, self.weights)
            record = train_key(
                key,
                self.mdp,
                self.model,
                self.gp,
                self.episodes,
                self.seed,
                trainer=self.trainer,
                init=self.store[donor].copy(),
                origin="online",
            )
            record.donor = donor
            self.store.insert(record)
            self.events.append((key, record.training_seconds))
        logger.info(
            "trained %s online from %s (distance %.3f) in %.2fs", key, donor, gap, record.training_seconds
        )
        return record.net


def run_with_transfer(
    x0,
    task,
    mdp,
    store: PolicyStore,
    activation,
    model,
    gp,
    *,
    disturbance=None,
    seed: int = 0,
    horizon: Optional[int] = None,
    executor: Optional[TransferExecutor] = None,
    **executor_options
):
    """
    Closed-loop rollout that trains every missing activated network on
    first use; the report lists the networks trained during the rollout
    """
    executor = executor or TransferExecutor(store, mdp, model, gp, seed=seed, **executor_options)
    start = len(executor.events)
    report = execute(
        x0,
        task,
        mdp,
        store,
        activation,
        model,
        disturbance=disturbance,
        seed=seed,
        horizon=horizon,
        resolver=executor,
    )
    report.online = executor.events[start:]
    return report
