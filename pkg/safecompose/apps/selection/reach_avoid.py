import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from safecompose.core.exceptions import ConfigurationError
from safecompose.core.geometry import Box
from safecompose.utils.files import dump_json, load_json

logger = logging.getLogger(__name__)


@dataclass
class Task:
    """Reach ``goal`` within ``horizon`` steps while avoiding every obstacle"""

    goal: Box
    obstacles: List[Box] = field(default_factory=list)
    horizon: int = 50
    name: str = "task"

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("task %s: horizon must be at least 1" % self.name)
        for obstacle in self.obstacles:
            if obstacle.dim != self.goal.dim:
                raise ConfigurationError(
                    "task %s: obstacle of dimension %d, goal of dimension %d"
                    % (self.name, obstacle.dim, self.goal.dim)
                )

    def in_goal(self, x) -> bool:
        return self.goal.contains(x)

    def in_obstacle(self, x) -> bool:
        return any(obstacle.contains(x) for obstacle in self.obstacles)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "goal": self.goal.to_list(),
            "obstacles": [o.to_list() for o in self.obstacles],
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Task":
        try:
            return cls(
                goal=Box.from_bounds(data["goal"]),
                obstacles=[Box.from_bounds(o) for o in data.get("obstacles", [])],
                horizon=int(data["horizon"]),
                name=data.get("name", "task"),
            )
        except (KeyError, TypeError, ValueError) as error:
            raise ConfigurationError("invalid task: %s" % error) from error

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Task":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError("task file %s does not exist" % path)
        data = load_json(path)
        data.setdefault("name", path.stem)
        return cls.from_dict(data)

    def dump(self, path: Union[str, Path]):
        dump_json(path, self.to_dict())


def mark_states(partition, task: Task) -> Tuple[np.ndarray, np.ndarray]:
    """
    Boolean masks of obstacle cells (closed intersection with an
    obstacle) and goal cells (contained in the goal)
    """
    obstacles = np.zeros(len(partition), dtype=bool)
    for obstacle in task.obstacles:
        obstacles[partition.overlapping(obstacle)] = True
    goal = np.all(
        (partition.lowers >= task.goal.lo) & (partition.uppers <= task.goal.hi), axis=1
    )
    if not goal.any():
        logger.warning("task %s: no cell lies inside the goal; every value will be 0", task.name)
    return obstacles, goal
