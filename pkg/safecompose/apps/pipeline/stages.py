"""
Pipeline stages shared by the management commands and the Celery tasks
"""
import functools
import logging
from typing import List, NamedTuple, Optional

import numpy as np

from safecompose.apps.abstraction.mdp import AbstractMDP, build_mdp
from safecompose.apps.dynamics.systems import check_disturbance_bound
from safecompose.apps.gp.datasets import ResidualDataset, UniformSampler, collect_residuals
from safecompose.apps.gp.regression import GPModel, fit
from safecompose.apps.policies.ppo import PPOSettings, ppo_train
from safecompose.apps.policies.store import LocalPolicyKey, PolicyStore
from safecompose.apps.policies.training import train_keys, transition_keys
from safecompose.apps.runtime.execution import run_batch
from safecompose.apps.selection.selection import SelectionResult, safe_initial_samples
from safecompose.apps.transfer.workflow import TransferExecutor, run_with_transfer, transfer_keys
from safecompose.core.exceptions import ConfigurationError, MissingArtifactError
from safecompose.core.geometry import Box
from safecompose.utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)


class Abstraction(NamedTuple):
    mdp: AbstractMDP
    model: object
    gp: GPModel
    truth: object
    disturbance: Box
    dataset: ResidualDataset


def learn_model_error(config, model, truth, partition) -> ResidualDataset:
    gp_options = config.cleaned("gp")
    sampler = UniformSampler(partition.domain, config.gp_input_box)
    return collect_residuals(model, truth, sampler, gp_options["samples"], derive_seed(config.seed, "gp"))


def build_abstraction(config, cache, force: bool = False):
    """
    Partitions, residual samples, GP fit and finite MDP for ``config``;
    returns ``(abstraction, built)`` with ``built`` false on a cache hit
    """
    if not force and cache.has_abstraction():
        logger.info("abstraction %s is cached, not rebuilding", cache.abstraction_digest[:12])
        return load_abstraction(config, cache), False
    model = config.build_model()
    truth = config.build_truth()
    partition, controller_grid = config.build_grids()
    input_box = config.gp_input_box
    check_disturbance_bound(
        truth, config.disturbance, partition.domain, input_box, make_rng(config.seed, "bound-check")
    )
    dataset = learn_model_error(config, model, truth, partition)
    gp = fit(dataset, config.hyperparameters)
    mdp = build_mdp(partition, controller_grid, model, gp, config.disturbance)
    mdp.store_value_in_metadata({"model": repr(model), "residuals": len(dataset)})
    cache.save_abstraction(mdp, dataset)
    return Abstraction(mdp, model, gp, truth, config.disturbance, dataset), True


def load_abstraction(config, cache) -> Abstraction:
    """Cached MDP plus the GP refitted on the cached residuals"""
    model = config.build_model()
    mdp = cache.load_mdp()
    dataset = cache.load_residuals(model.state_dim)
    gp = fit(dataset, config.hyperparameters)
    return Abstraction(mdp, model, gp, config.build_truth(), config.disturbance, dataset)


def make_trainer(config):
    """``ppo_train`` bound to the PPO knobs of the ``training`` section"""
    return functools.partial(ppo_train, settings=PPOSettings.from_app_settings(**config.ppo_overrides()))


def offline_keys(bundle: Abstraction, selection: Optional[SelectionResult] = None) -> List[LocalPolicyKey]:
    """Every transition, or the step-0 activation of one task"""
    if selection is None:
        return transition_keys(bundle.mdp)
    if selection.is_empty:
        logger.warning("task %s: no safe cell to train; the store stays empty", selection.task.name)
    return transfer_keys(selection)


def train_store(config, bundle: Abstraction, keys, store: PolicyStore) -> PolicyStore:
    return train_keys(
        keys,
        bundle.mdp,
        bundle.model,
        bundle.gp,
        config.cleaned("training")["offline_episodes"],
        config.seed,
        trainer=make_trainer(config),
        store=store,
    )


def make_executor(config, bundle: Abstraction, store: PolicyStore) -> TransferExecutor:
    return TransferExecutor(
        store,
        bundle.mdp,
        bundle.model,
        bundle.gp,
        episodes=config.cleaned("training")["online_episodes"],
        seed=config.seed,
        weights=config.transfer_weights,
        trainer=make_trainer(config),
    )


def initial_states(config, selection: SelectionResult, partition, x0=None, count=None) -> np.ndarray:
    """
    ``x0`` checked against ``X_init``, or ``count`` seeded samples of the
    goal-free safe cells
    """
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (partition.dim,):
            raise ConfigurationError("x0 needs %d coordinates, got %d" % (partition.dim, x0.size))
        if not selection.safe.contains(partition, x0):
            raise ConfigurationError(
                "x0 = %s lies outside the safe initial set of task %s" % (x0.tolist(), selection.task.name)
            )
        return x0[np.newaxis]
    count = config.cleaned("runtime")["samples"] if count is None else count
    rng = make_rng(config.seed, "initial", selection.task.name)
    return safe_initial_samples(selection, partition, rng, count)


def run_rollouts(config, bundle: Abstraction, selection: SelectionResult, executor, states, mode=None):
    """
    :func:`run_batch` through ``executor``, which trains missing networks
    online; rollout ``i`` is seeded by ``(seed, task, i)``
    """
    mode = mode or config.cleaned("runtime")["disturbance_mode"]
    reports = run_batch(
        states,
        selection.task,
        bundle.mdp,
        executor.store,
        selection.activation,
        bundle.model,
        mode=mode,
        bound=bundle.disturbance,
        truth=bundle.truth,
        seed=config.seed,
        rollout=functools.partial(run_with_transfer, gp=bundle.gp, executor=executor),
    )
    logger.info("task %s: %d networks trained online", selection.task.name, len(executor.events))
    return reports


def require_activated(selection: SelectionResult, store: PolicyStore):
    missing = selection.missing_keys(store)
    if missing:
        raise MissingArtifactError(
            "the store lacks %d networks activated by task %s (first: %s); "
            "run `manage.py train --task` first" % (len(missing), selection.task.name, missing[0])
        )
