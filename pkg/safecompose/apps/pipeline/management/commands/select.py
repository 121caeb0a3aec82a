from safecompose.apps.pipeline.management.base import TaskCommand
from safecompose.apps.pipeline.stages import load_abstraction
from safecompose.apps.selection.reach_avoid import Task
from safecompose.apps.selection.selection import select
from safecompose.core.decorators import prerequisites_required, raises_command_error

SELECTION_FILE = "selection.json"


class Command(TaskCommand):
    help = "Safety backtracking and the liveness recursion for one task; writes the selection JSON"

    @raises_command_error
    def handle(self, *args, **options):
        config = self.load_config(options)
        self.run_selection(config, self.load_cache(config), options)

    @prerequisites_required("abstraction")
    def run_selection(self, config, cache, options):
        task = Task.load(options["task"])
        bundle = load_abstraction(config, cache)
        store = cache.load_store() if cache.has_store() else None
        selection = select(task, bundle.mdp, store)
        path = self.output_dir(config, task) / SELECTION_FILE
        selection.dump(path)
        if selection.is_empty:
            self.stdout.write(self.style.WARNING("task %s: no safe initial states; wrote %s" % (task.name, path)))
            return
        self.stdout.write(
            "task %s: %d safe cells, %d activated transitions; wrote %s"
            % (task.name, len(selection.safe.safe_ids), len(selection.activation.keys()), path)
        )
