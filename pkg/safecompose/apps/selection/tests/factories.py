import factory

from safecompose.apps.selection.reach_avoid import Task
from safecompose.core.geometry import Box


def cell_interior(q: int, dim: int = 1) -> Box:
    """A box strictly inside unit cell ``q`` of a 1-D grid"""
    return Box([q + 0.25] * dim, [q + 0.75] * dim)


def cell_cover(q: int) -> Box:
    return Box([float(q)], [q + 1.0])


class TaskFactory(factory.Factory):
    name = factory.Sequence(lambda n: "task-%d" % n)
    goal = factory.LazyFunction(lambda: cell_cover(3))
    obstacles = factory.LazyFunction(list)
    horizon = 3

    class Meta:
        model = Task
