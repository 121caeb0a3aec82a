import csv

import pytest

from safecompose.apps.runtime.execution import execute
from safecompose.apps.runtime.plotting import plot_rollouts
from safecompose.apps.runtime.reports import TRAJECTORY_HEADER, write_run_report, write_trajectory_csv
from safecompose.apps.runtime.tests.factories import drift_setup
from safecompose.utils.files import load_json


@pytest.fixture(scope="module")
def setup():
    return drift_setup()


@pytest.fixture
def report(setup):
    return execute(
        [0.75, 1.1], setup.task, setup.mdp, setup.store, setup.selection.activation, setup.model
    )


def test_trajectory_csv(report, tmp_path):
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(path, report)
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert tuple(rows[0]) == TRAJECTORY_HEADER
    assert len(rows) == len(report.trajectory) + 1
    assert rows[1][0] == "0"
    assert rows[1][3] == report.keys[0].slug
    # the final state is not followed by an input
    assert rows[-1][2] == "" and rows[-1][3] == ""


def test_run_report(setup, report, tmp_path):
    path = tmp_path / "run.json"
    write_run_report(path, [report], setup.selection)
    data = load_json(path)
    assert data["task"] == setup.task.name
    assert data["rollouts"][0]["outcome"] == "goal"
    assert data["online_trained"] == []
    assert data["assign_seconds"] == setup.selection.seconds


def test_svg_plot(setup, report, tmp_path):
    path = tmp_path / "rollouts.svg"
    plot_rollouts(path, setup.task, [report], domain=setup.mdp.partition.domain)
    assert path.read_text().lstrip().startswith("<?xml")
    assert "<svg" in path.read_text()
