import logging

from config import celery_app
from safecompose.apps.pipeline.artifacts import ArtifactCache
from safecompose.apps.pipeline.forms import RunConfig
from safecompose.apps.pipeline.stages import load_abstraction, make_trainer
from safecompose.apps.policies.store import LocalPolicyKey, PolicyRecord
from safecompose.apps.policies.training import train_key
from safecompose.core.exceptions import SafeComposeError

logger = logging.getLogger(__name__)


@celery_app.task()
def train_transition(config_data, key, origin="offline"):
    """Train and project the network of one transition; returns the record as a dict"""
    config = RunConfig.from_dict(config_data)
    bundle = load_abstraction(config, ArtifactCache.for_config(config))
    record = train_key(
        LocalPolicyKey(*key),
        bundle.mdp,
        bundle.model,
        bundle.gp,
        config.cleaned("training")["offline_episodes"],
        config.seed,
        trainer=make_trainer(config),
        origin=origin,
    )
    return record.to_dict()


def _record_failure(store, key, error):
    logger.warning("training %s failed: %s", key, error)
    store.append_value_in_metadata("failures", {"key": key.to_list(), "error": str(error)})


def dispatch_training(config, keys, store):
    """
    Queue one :func:`train_transition` per key missing from ``store`` and
    insert the results; failures are listed under the ``failures``
    metadata entry like in-process training
    """
    keys = list(keys)
    store.expected.update(keys)
    pending = store.missing(keys)
    config_data = config.to_dict()
    results = []
    for key in pending:
        # eager execution raises here instead of in result.get()
        try:
            results.append((key, train_transition.delay(config_data, key.to_list())))
        except SafeComposeError as error:
            _record_failure(store, key, error)
    logger.info("dispatched %d training jobs (%d already stored)", len(pending), len(keys) - len(pending))
    for key, result in results:
        try:
            store.insert(PolicyRecord.from_dict(result.get()))
        except SafeComposeError as error:
            _record_failure(store, key, error)
    return store
