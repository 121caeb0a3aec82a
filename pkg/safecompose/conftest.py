import pytest

from safecompose.apps.pipeline.forms import RunConfig
from safecompose.apps.pipeline.tests.factories import RunConfigDataFactory


@pytest.fixture(autouse=True)
def artifact_cache(settings, tmpdir):
    settings.SAFECOMPOSE_CACHE_ROOT = tmpdir.join("cache").strpath


@pytest.fixture
def run_config(tmp_path) -> RunConfig:
    data = RunConfigDataFactory(paths={"cache": str(tmp_path / "cache"), "output": str(tmp_path / "output")})
    return RunConfig.from_dict(data)
