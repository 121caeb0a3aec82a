import csv
import io
from pathlib import Path
from typing import Union

from safecompose.utils.files import atomic_write, dump_json

TRAJECTORY_HEADER = ("k", "x", "u", "key")


def trajectory_rows(report):
    """
    ``(k, x, u, key)`` per visited state; the last state carries no input
    """
    states = report.trajectory.states
    inputs = report.trajectory.inputs
    for k, x in enumerate(states):
        u = inputs[k] if k < len(inputs) else None
        key = report.keys[k] if k < len(report.keys) else None
        yield (
            k,
            " ".join("%.17g" % v for v in x),
            "" if u is None else " ".join("%.17g" % v for v in u),
            "" if key is None else key.slug,
        )


def write_trajectory_csv(path: Union[str, Path], report):
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(TRAJECTORY_HEADER)
    writer.writerows(trajectory_rows(report))
    atomic_write(path, buffer.getvalue())


def write_run_report(path: Union[str, Path], reports, selection=None):
    """Run report JSON: every rollout plus the keys trained online"""
    online = [(key, seconds) for r in reports for key, seconds in r.online]
    dump_json(
        path,
        {
            "task": reports[0].task if reports else None,
            "assign_seconds": selection.seconds if selection is not None else None,
            "rollouts": [r.to_dict() for r in reports],
            "online_trained": [{"key": key.to_list(), "seconds": seconds} for key, seconds in online],
        },
    )
