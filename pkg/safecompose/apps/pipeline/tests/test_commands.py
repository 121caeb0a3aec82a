from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from safecompose.apps.pipeline.artifacts import ArtifactCache
from safecompose.apps.pipeline.forms import RunConfig
from safecompose.apps.pipeline.tests.factories import write_config, write_task
from safecompose.apps.selection.reach_avoid import Task
from safecompose.apps.selection.selection import select
from safecompose.apps.transfer.workflow import transfer_keys
from safecompose.core.decorators import EXIT_CONFIG_ERROR, EXIT_MISSING_PREREQUISITE
from safecompose.utils.files import load_json


def run(name, *args, **options):
    out = StringIO()
    call_command(name, *args, stdout=out, **options)
    return out.getvalue()


@pytest.fixture
def config_path(tmp_path):
    return write_config(tmp_path)


@pytest.fixture
def task_path(tmp_path):
    return write_task(tmp_path)


@pytest.fixture
def trained(config_path, task_path):
    run("abstract", config=str(config_path))
    run("train", task=str(task_path), config=str(config_path))
    return config_path


def cache_for(config_path):
    return ArtifactCache.for_config(RunConfig.from_yaml(config_path))


class TestAbstract:
    def test_second_run_is_a_cache_hit(self, config_path):
        assert run("abstract", config=str(config_path)).startswith("built")
        assert run("abstract", config=str(config_path)).startswith("cached")
        assert run("abstract", "--force", config=str(config_path)).startswith("built")

    def test_changed_grid_rebuilds(self, tmp_path, config_path):
        run("abstract", config=str(config_path))
        regridded = write_config(tmp_path, name="coarse.yaml", grids__counts=[2, 2])
        out = run("abstract", config=str(regridded))
        assert out.startswith("built")
        assert "4 states x 2 partitions" in out
        assert cache_for(regridded).abstraction_dir != cache_for(config_path).abstraction_dir

    def test_invalid_config_exits_with_2(self, tmp_path):
        path = write_config(tmp_path, dynamics__dt=-1.0)
        with pytest.raises(CommandError, match="dynamics.dt") as excinfo:
            run("abstract", config=str(path))
        assert excinfo.value.returncode == EXIT_CONFIG_ERROR

    def test_missing_config_file_exits_with_2(self, tmp_path):
        with pytest.raises(CommandError) as excinfo:
            run("abstract", config=str(tmp_path / "nowhere.yaml"))
        assert excinfo.value.returncode == EXIT_CONFIG_ERROR


class TestTrain:
    def test_training_needs_the_abstraction(self, config_path):
        with pytest.raises(CommandError, match="manage.py abstract") as excinfo:
            run("train", config=str(config_path))
        assert excinfo.value.returncode == EXIT_MISSING_PREREQUISITE

    def test_task_training_covers_the_first_activation(self, trained, task_path):
        cache = cache_for(trained)
        store = cache.load_store()
        mdp = cache.load_mdp()
        keys = transfer_keys(select(Task.load(task_path), mdp))
        assert store.config_hash == RunConfig.from_yaml(trained).store_digest()
        assert len(store) > 0
        assert set(store) <= set(keys)
        assert set(store) | set(store.missing(keys)) == set(keys)

    def test_unsafe_task_trains_nothing(self, tmp_path, config_path):
        run("abstract", config=str(config_path))
        blocked = write_task(tmp_path, name="blocked", obstacles=[[[0.0, 2.0], [0.0, 2.0]]])
        out = run("train", task=str(blocked), config=str(config_path))
        assert "0 networks" in out

    def test_missing_task_file_exits_with_2(self, tmp_path, config_path):
        run("abstract", config=str(config_path))
        with pytest.raises(CommandError) as excinfo:
            run("train", task=str(tmp_path / "absent.json"), config=str(config_path))
        assert excinfo.value.returncode == EXIT_CONFIG_ERROR

    def test_dispatched_training(self, settings, config_path, task_path):
        settings.CELERY_TASK_ALWAYS_EAGER = True
        run("abstract", config=str(config_path))
        run("train", "--dispatch", task=str(task_path), config=str(config_path))
        store = cache_for(config_path).load_store()
        assert len(store) > 0
        assert all(store.record(key).origin == "offline" for key in store)


class TestSelect:
    def test_selection_json(self, tmp_path, config_path, task_path):
        run("abstract", config=str(config_path))
        out = run("select", str(task_path), config=str(config_path))
        assert "safe cells" in out
        selection = load_json(tmp_path / "output" / "reach" / "selection.json")
        assert selection["x_init"]
        assert selection["task"]["horizon"] == 12

    def test_empty_safe_set_is_not_an_error(self, tmp_path, config_path):
        run("abstract", config=str(config_path))
        blocked = write_task(tmp_path, name="blocked", obstacles=[[[0.0, 2.0], [0.0, 2.0]]])
        out = run("select", str(blocked), config=str(config_path))
        assert "no safe initial states" in out
        assert load_json(tmp_path / "output" / "blocked" / "selection.json")["x_init"] == []


class TestRun:
    def test_run_needs_a_store(self, config_path, task_path):
        run("abstract", config=str(config_path))
        with pytest.raises(CommandError, match="manage.py train") as excinfo:
            run("run", str(task_path), config=str(config_path))
        assert excinfo.value.returncode == EXIT_MISSING_PREREQUISITE

    def test_sampled_rollouts_stay_safe(self, tmp_path, trained, task_path):
        out = run("run", str(task_path), "--plot", config=str(trained))
        assert "5 rollouts" in out
        directory = tmp_path / "output" / "reach"
        summary = load_json(directory / "summary.json")
        assert summary["rows"][0]["rollouts"] == 5
        assert summary["rows"][0]["violations"] == 0
        report = load_json(directory / "run.json")
        assert len(report["rollouts"]) == 5
        assert (directory / "trajectories" / "rollout-0004.csv").exists()
        assert (directory / "rollouts.svg").exists()

    def test_online_networks_are_saved(self, tmp_path, trained, task_path):
        run("run", str(task_path), sample=3, config=str(trained))
        report = load_json(tmp_path / "output" / "reach" / "run.json")
        store = cache_for(trained).load_store()
        online = {tuple(entry["key"]) for entry in report["online_trained"]}
        assert online == {tuple(key.to_list()) for key in store.online_keys()}

    def test_unsafe_x0_is_refused(self, trained, task_path):
        with pytest.raises(CommandError, match="safe initial set") as excinfo:
            run("run", str(task_path), x0=[0.25, 0.75], config=str(trained))
        assert excinfo.value.returncode == EXIT_CONFIG_ERROR


class TestBound:
    def test_bound_report(self, tmp_path, trained, task_path):
        run("train", "--all", config=str(trained))
        out = run("bound", str(task_path), config=str(trained))
        assert "bound(0)" in out
        report = load_json(tmp_path / "output" / "reach" / "bound.json")
        assert len(report["gap"]["bound"]) == 13
        assert report["gap"]["bound"][-1] == 0.0
        assert report["constants"]["safe_count"] > 0

    def test_bound_needs_every_activated_network(self, tmp_path, config_path, task_path):
        run("abstract", config=str(config_path))
        blocked = write_task(tmp_path, name="blocked", obstacles=[[[0.0, 2.0], [0.0, 2.0]]])
        run("train", task=str(blocked), config=str(config_path))
        with pytest.raises(CommandError, match="run `manage.py train --task`") as excinfo:
            run("bound", str(task_path), config=str(config_path))
        assert excinfo.value.returncode == EXIT_MISSING_PREREQUISITE
