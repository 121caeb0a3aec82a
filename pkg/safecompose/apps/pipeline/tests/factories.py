from pathlib import Path

import factory
import yaml

from safecompose.utils.files import dump_json


class DynamicsSectionFactory(factory.DictFactory):
    name = "drift_integrator"
    dt = 0.1
    drift = 1.0
    disturbance = factory.LazyFunction(lambda: [[0.0, 0.02], [0.0, 0.02]])


class TruthSectionFactory(factory.DictFactory):
    name = "zero"


class GaussianProcessSectionFactory(factory.DictFactory):
    signal_variance = 1e-4
    lengthscales = factory.LazyFunction(lambda: [1.0])
    noise_variance = 1e-6
    samples = 20
    input_box = factory.LazyFunction(lambda: [[-1.0, 1.0]])


class GridSectionFactory(factory.DictFactory):
    """The 4 x 4 drift grid with two offset partitions"""

    domain = factory.LazyFunction(lambda: [[0.0, 2.0], [0.0, 2.0]])
    counts = factory.LazyFunction(lambda: [4, 4])
    periodic_dims = factory.LazyFunction(list)
    controller_box = factory.LazyFunction(lambda: [[0.0, 0.0], [0.0, 0.0], [-1.0, 1.0]])
    controller_counts = factory.LazyFunction(lambda: [1, 1, 2])


class TrainingSectionFactory(factory.DictFactory):
    seed = 0
    offline_episodes = 2
    online_episodes = 1
    hidden_width = 2
    episode_length = 3
    epochs_per_episode = 1


class RunConfigDataFactory(factory.DictFactory):
    """A drift-integrator run small enough to abstract, train and run in tests"""

    version = 1
    dynamics = factory.SubFactory(DynamicsSectionFactory)
    truth = factory.SubFactory(TruthSectionFactory)
    gp = factory.SubFactory(GaussianProcessSectionFactory)
    grids = factory.SubFactory(GridSectionFactory)
    training = factory.SubFactory(TrainingSectionFactory)
    runtime = factory.LazyFunction(lambda: {"disturbance_mode": "random", "samples": 5})


def write_config(directory, name="run.yaml", **overrides) -> Path:
    """YAML run config under ``directory`` whose outputs stay inside it"""
    directory = Path(directory)
    data = RunConfigDataFactory(**overrides)
    data.setdefault(
        "paths", {"cache": str(directory / "cache"), "output": str(directory / "output")}
    )
    path = directory / name
    path.write_text(yaml.safe_dump(data))
    return path


def write_task(directory, name="reach", **overrides) -> Path:
    """
    Right column of the drift grid as goal, one obstacle inside the
    left column
    """
    data = {
        "name": name,
        "goal": [[1.5, 2.0], [0.0, 2.0]],
        "obstacles": [[[0.1, 0.4], [0.6, 0.9]]],
        "horizon": 12,
    }
    data.update(overrides)
    path = Path(directory) / ("%s.json" % name)
    dump_json(path, data)
    return path
