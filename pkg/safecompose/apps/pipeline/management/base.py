from pathlib import Path

from django.core.management.base import BaseCommand

from safecompose.apps.pipeline.artifacts import ArtifactCache
from safecompose.apps.pipeline.forms import RunConfig
from safecompose.apps.selection.reach_avoid import Task


class PipelineCommand(BaseCommand):
    """
    Base class of the pipeline commands: every command reads one run
    configuration (``--config``, the defaults when omitted) and works in
    the artifact cache that configuration selects
    """

    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            default=None,
            help="YAML run configuration; sections left out take the project defaults",
        )

    def load_config(self, options) -> RunConfig:
        path = options.get("config")
        return RunConfig.from_yaml(path) if path else RunConfig.from_dict({})

    def load_cache(self, config) -> ArtifactCache:
        return ArtifactCache.for_config(config)

    def output_dir(self, config, task: Task) -> Path:
        directory = Path(config.cleaned("paths")["output"]) / task.name
        directory.mkdir(parents=True, exist_ok=True)
        return directory


class TaskCommand(PipelineCommand):
    """A pipeline command working on one reach-avoid task file"""

    def add_arguments(self, parser):
        parser.add_argument("task", help="JSON task file: goal, obstacles, horizon")
        super().add_arguments(parser)
