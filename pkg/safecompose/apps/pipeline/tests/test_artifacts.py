import pytest

from safecompose.apps.abstraction.tests.factories import two_route_mdp
from safecompose.apps.pipeline.artifacts import ArtifactCache
from safecompose.apps.pipeline.forms import RunConfig
from safecompose.apps.pipeline.stages import build_abstraction
from safecompose.apps.pipeline.tests.factories import RunConfigDataFactory
from safecompose.apps.policies.tests.factories import center_law_trainer
from safecompose.apps.policies.training import train_all
from safecompose.core.exceptions import ArtifactMismatchError, MissingArtifactError
from safecompose.utils.files import load_json


def test_cache_root_setting_wins(settings, tmp_path, run_config):
    settings.SAFECOMPOSE_CACHE_ROOT = str(tmp_path / "override")
    assert ArtifactCache.for_config(run_config).root == tmp_path / "override"


def test_cache_root_falls_back_to_the_config(settings, tmp_path, run_config):
    settings.SAFECOMPOSE_CACHE_ROOT = ""
    assert ArtifactCache.for_config(run_config).root == tmp_path / "cache"


def test_directories_follow_the_digests(run_config):
    cache = ArtifactCache.for_config(run_config)
    regridded = ArtifactCache.for_config(RunConfig.from_dict(RunConfigDataFactory(grids__counts=[2, 2])))
    longer = ArtifactCache.for_config(RunConfig.from_dict(RunConfigDataFactory(training__offline_episodes=9)))
    assert cache.abstraction_dir.name == run_config.abstraction_digest()[:16]
    assert regridded.abstraction_dir != cache.abstraction_dir
    assert longer.abstraction_dir == cache.abstraction_dir
    assert longer.store_dir != cache.store_dir


def test_nothing_is_cached_initially(run_config):
    cache = ArtifactCache.for_config(run_config)
    assert not cache.has_abstraction()
    assert not cache.has_store()
    assert len(cache.store_or_empty()) == 0
    with pytest.raises(MissingArtifactError):
        cache.load_mdp()
    with pytest.raises(MissingArtifactError):
        cache.load_residuals(2)
    with pytest.raises(MissingArtifactError):
        cache.load_store()


def test_saved_abstraction(run_config):
    cache = ArtifactCache.for_config(run_config)
    bundle, built = build_abstraction(run_config, cache)
    assert built
    assert cache.has_abstraction()
    mdp = cache.load_mdp()
    assert mdp.config_hash == run_config.abstraction_digest()
    assert mdp.targets.tolist() == bundle.mdp.targets.tolist()
    assert len(cache.load_residuals(2)) == 20
    dump = load_json(cache.partition_path)
    assert len(dump["states"]["cells"]) == 16
    assert len(dump["controllers"]["cells"]) == 2


def test_store_is_stamped_and_checked(tmp_path):
    store = train_all(two_route_mdp(), None, None, episodes=1, seed=0, trainer=center_law_trainer)
    digest = "a" * 64
    ArtifactCache(tmp_path, "b" * 64, digest).save_store(store)
    loaded = ArtifactCache(tmp_path, "b" * 64, digest).load_store()
    assert loaded.config_hash == digest
    assert sorted(loaded) == sorted(store)
    # same directory, different full digest
    with pytest.raises(ArtifactMismatchError):
        ArtifactCache(tmp_path, "b" * 64, "a" * 16 + "c" * 48).load_store()
