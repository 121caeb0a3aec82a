"""
Per-task summary of rollout batches: success rate, mean trajectory
length, safety violations and the runtime timings of each task
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from safecompose.utils.files import dump_json

COLUMNS = (
    "task",
    "rollouts",
    "success_rate",
    "mean_length",
    "violations",
    "assign_seconds",
    "trajectory_seconds",
    "online_trained",
)


@dataclass
class TaskBatch:
    task: str
    reports: List = field(default_factory=list)
    #: time spent selecting the activation map for the task
    assign_seconds: float = 0.0


def _row(batch: TaskBatch) -> dict:
    reports = batch.reports
    count = len(reports)
    online = {tuple(key.to_list()) for r in reports for key, _ in r.online}
    return {
        "task": batch.task,
        "rollouts": count,
        "success_rate": float(np.mean([r.reached_goal for r in reports])) if count else 0.0,
        "mean_length": float(np.mean([r.steps for r in reports])) if count else 0.0,
        "violations": int(sum(r.safety_violation for r in reports)),
        "assign_seconds": float(batch.assign_seconds),
        "trajectory_seconds": float(np.mean([r.seconds for r in reports])) if count else 0.0,
        "online_trained": len(online),
    }


def batch_stats(batches: Sequence[TaskBatch]) -> List[dict]:
    """One row per task batch, keyed by :py:data:`COLUMNS`"""
    return [_row(batch) for batch in batches]


def outcome_counts(reports) -> dict:
    counts = {}
    for report in reports:
        counts[report.outcome] = counts.get(report.outcome, 0) + 1
    return counts


def dump_summary(path: Union[str, Path], batches: Sequence[TaskBatch]):
    dump_json(
        path,
        {
            "columns": list(COLUMNS),
            "rows": batch_stats(batches),
            "outcomes": {batch.task: outcome_counts(batch.reports) for batch in batches},
        },
    )
