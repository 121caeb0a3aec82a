"""
SVG figure of rollouts in the first two state coordinates
"""
import logging
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

logger = logging.getLogger(__name__)

OBSTACLE_COLOR = "tab:blue"
GOAL_COLOR = "tab:green"


def _rectangle(box, color, alpha):
    lo, hi = box.lo[:2], box.hi[:2]
    return Rectangle(lo, hi[0] - lo[0], hi[1] - lo[1], color=color, alpha=alpha, linewidth=0)


def plot_rollouts(path: Union[str, Path], task, reports: Sequence, domain=None):
    """
    Obstacles in blue, the goal in green and one line per rollout; the
    start of each rollout is marked with a dot
    """
    figure, axes = plt.subplots(figsize=(6, 6))
    try:
        for obstacle in task.obstacles:
            axes.add_patch(_rectangle(obstacle, OBSTACLE_COLOR, 0.6))
        axes.add_patch(_rectangle(task.goal, GOAL_COLOR, 0.4))
        for report in reports:
            states = report.trajectory.state_array()
            color = "tab:red" if report.safety_violation else "black"
            axes.plot(states[:, 0], states[:, 1], color=color, linewidth=0.8)
            axes.plot(states[0, 0], states[0, 1], "o", color=color, markersize=2)
        if domain is not None:
            axes.set_xlim(domain.lo[0], domain.hi[0])
            axes.set_ylim(domain.lo[1], domain.hi[1])
        axes.set_aspect("equal")
        axes.set_xlabel("x")
        axes.set_ylabel("y")
        axes.set_title(task.name)
        figure.savefig(path, format="svg")
    finally:
        plt.close(figure)
    logger.info("wrote %d rollouts of task %s to %s", len(reports), task.name, path)
