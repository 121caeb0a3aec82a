from typing import NamedTuple

import factory

from safecompose.apps.abstraction.tests.factories import drift_instance
from safecompose.apps.policies.tests.factories import center_law_trainer
from safecompose.apps.policies.training import train_keys
from safecompose.apps.selection.selection import select
from safecompose.apps.selection.tests.factories import TaskFactory
from safecompose.core.geometry import Box


class DriftTaskFactory(TaskFactory):
    """
    Right column of the drift grid as goal, one obstacle inside the
    left column; safe cells are the three right columns
    """

    goal = factory.LazyFunction(lambda: Box([1.5, 0.0], [2.0, 2.0]))
    obstacles = factory.LazyFunction(lambda: [Box([0.1, 0.6], [0.4, 0.9])])
    horizon = 12


class DriftSetup(NamedTuple):
    mdp: object
    model: object
    gp: object
    bound: Box
    task: object
    selection: object
    store: object


def drift_setup(**task_kwargs) -> DriftSetup:
    """Drift instance, its selection and center-law networks for every activated key"""
    mdp, model, gp, bound = drift_instance()
    task = DriftTaskFactory(**task_kwargs)
    selection = select(task, mdp)
    store = train_keys(
        sorted(selection.activation.keys()), mdp, model, gp, 1, 0, trainer=center_law_trainer
    )
    return DriftSetup(mdp, model, gp, bound, task, selection, store)
