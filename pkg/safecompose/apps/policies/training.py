import logging
import time
from typing import Callable, Iterable, List, Optional

from safecompose.apps.policies.ppo import ppo_train
from safecompose.apps.policies.projection import project_with_certificate
from safecompose.apps.policies.store import LocalPolicyKey, PolicyRecord, PolicyStore
from safecompose.core.exceptions import SafeComposeError

logger = logging.getLogger(__name__)

#: ``trainer(key, mdp, model, gp, episodes, seed, init=None) -> ShallowReluNet``
Trainer = Callable


def transition_keys(mdp) -> List[LocalPolicyKey]:
    """Every ``(q, P, q')`` with positive probability, in id order"""
    return [LocalPolicyKey(q, p, target) for q, p, target, _ in mdp.transitions()]


def train_key(
    key: LocalPolicyKey,
    mdp,
    model,
    gp,
    episodes: int,
    seed: int,
    *,
    trainer: Optional[Trainer] = None,
    init=None,
    origin="offline",
) -> PolicyRecord:
    """Train the network of one transition and project it onto its partition"""
    trainer = trainer or ppo_train
    started = time.perf_counter()
    net = trainer(key, mdp, model, gp, episodes, seed, init=init)
    projected, certificate = project_with_certificate(
        net,
        mdp.controller_grid.partitions[key.p].box,
        mdp.partition.states[key.q].box,
    )
    return PolicyRecord(
        key=key,
        net=projected,
        certificate=certificate,
        origin=origin,
        training_seconds=time.perf_counter() - started,
    )


def train_keys(
    keys: Iterable[LocalPolicyKey],
    mdp,
    model,
    gp,
    episodes: int,
    seed: int,
    *,
    trainer: Optional[Trainer] = None,
    store: Optional[PolicyStore] = None,
) -> PolicyStore:
    """
    Train every key not yet in ``store``; failures are logged and listed
    under the ``failures`` metadata entry instead of aborting the batch
    """
    keys = list(keys)
    store = store if store is not None else PolicyStore()
    store.expected.update(keys)
    pending = store.missing(keys)
    logger.info("training %d local networks (%d already stored)", len(pending), len(keys) - len(pending))
    for index, key in enumerate(pending, 1):
        try:
            store.insert(train_key(key, mdp, model, gp, episodes, seed, trainer=trainer))
        except SafeComposeError as error:
            logger.warning("training %s failed: %s", key, error)
            store.append_value_in_metadata("failures", {"key": key.to_list(), "error": str(error)})
        if index % 50 == 0:
            logger.info("trained %d / %d local networks", index, len(pending))
    missing = store.missing(keys)
    if missing:
        logger.warning("%d local networks missing after training", len(missing))
    return store


def train_all(mdp, model, gp, episodes: int, seed: int, *, trainer=None, store=None) -> PolicyStore:
    """One projected network per transition of the MDP"""
    return train_keys(transition_keys(mdp), mdp, model, gp, episodes, seed, trainer=trainer, store=store)
