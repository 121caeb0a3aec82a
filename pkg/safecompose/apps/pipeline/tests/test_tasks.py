from celery.result import EagerResult

from safecompose.apps.pipeline.artifacts import ArtifactCache
from safecompose.apps.pipeline.stages import build_abstraction
from safecompose.apps.pipeline.tasks import dispatch_training, train_transition
from safecompose.apps.policies.store import PolicyRecord, PolicyStore
from safecompose.apps.policies.training import transition_keys


def test_train_transition(settings, run_config):
    """Train one transition through the eager Celery task"""
    bundle, _ = build_abstraction(run_config, ArtifactCache.for_config(run_config))
    key = transition_keys(bundle.mdp)[0]
    settings.CELERY_TASK_ALWAYS_EAGER = True
    task_result = train_transition.delay(run_config.to_dict(), key.to_list())
    assert isinstance(task_result, EagerResult)
    record = PolicyRecord.from_dict(task_result.result)
    assert record.key == key
    assert record.origin == "offline"
    assert record.certificate.max_violation <= 1e-6


def test_dispatch_skips_stored_networks(settings, run_config):
    bundle, _ = build_abstraction(run_config, ArtifactCache.for_config(run_config))
    keys = transition_keys(bundle.mdp)[:2]
    settings.CELERY_TASK_ALWAYS_EAGER = True
    store = dispatch_training(run_config, keys[:1], PolicyStore())
    assert list(store) == keys[:1]
    first = store.record(keys[0])
    dispatch_training(run_config, keys, store)
    assert store.record(keys[0]) is first
    assert sorted(store) == sorted(keys)
