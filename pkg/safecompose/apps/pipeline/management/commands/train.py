from safecompose.apps.pipeline.management.base import PipelineCommand
from safecompose.apps.pipeline.stages import load_abstraction, offline_keys, train_store
from safecompose.apps.pipeline.tasks import dispatch_training
from safecompose.apps.selection.reach_avoid import Task
from safecompose.apps.selection.selection import select
from safecompose.core.decorators import prerequisites_required, raises_command_error


class Command(PipelineCommand):
    help = (
        "Train projected local networks: one per MDP transition (--all) "
        "or the step-0 activation of one task (--task)"
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        scope = parser.add_mutually_exclusive_group()
        scope.add_argument("--all", action="store_true", help="every transition of the MDP (the default)")
        scope.add_argument("--task", default=None, help="JSON task file restricting training to its activation")
        parser.add_argument("--dispatch", action="store_true", help="queue one Celery job per transition")

    @raises_command_error
    def handle(self, *args, **options):
        config = self.load_config(options)
        self.train(config, self.load_cache(config), options)

    @prerequisites_required("abstraction")
    def train(self, config, cache, options):
        bundle = load_abstraction(config, cache)
        selection = select(Task.load(options["task"]), bundle.mdp) if options["task"] else None
        keys = offline_keys(bundle, selection)
        store = cache.store_or_empty()
        if options["dispatch"]:
            dispatch_training(config, keys, store)
        else:
            train_store(config, bundle, keys, store)
        cache.save_store(store)
        self.stdout.write(
            "store %s: %d networks, %d of %d requested missing"
            % (cache.store_dir, len(store), len(store.missing(keys)), len(keys))
        )
