from safecompose.apps.pipeline.management.base import PipelineCommand
from safecompose.apps.pipeline.stages import build_abstraction
from safecompose.core.decorators import raises_command_error


class Command(PipelineCommand):
    help = "Build the state and controller grids, fit the GP model error and compute the finite MDP"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--force", action="store_true", help="rebuild even when the cache holds the abstraction")

    @raises_command_error
    def handle(self, *args, **options):
        config = self.load_config(options)
        cache = self.load_cache(config)
        bundle, built = build_abstraction(config, cache, force=options["force"])
        mdp = bundle.mdp
        self.stdout.write(
            "%s abstraction %s: %d states x %d partitions, %d transitions"
            % (
                "built" if built else "cached",
                cache.abstraction_dir,
                mdp.num_states,
                mdp.num_actions,
                len(mdp.targets),
            )
        )
