from safecompose.apps.bounds.gap import compute_bound_constants, dump_bound_report, optimality_gap_bound
from safecompose.apps.bounds.oracles import oracle_values
from safecompose.apps.pipeline.management.base import TaskCommand
from safecompose.apps.pipeline.stages import load_abstraction, require_activated
from safecompose.apps.selection.reach_avoid import Task
from safecompose.apps.selection.selection import select
from safecompose.core.decorators import prerequisites_required, raises_command_error
from safecompose.utils.files import dump_json


class Command(TaskCommand):
    help = "Compute the optimality gap bound of the composed controller for one task"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--oracle",
            type=int,
            default=None,
            metavar="REFINEMENT",
            help="also compare against fine-grid value oracles (at most 2 state dimensions)",
        )

    @raises_command_error
    def handle(self, *args, **options):
        config = self.load_config(options)
        self.bound(config, self.load_cache(config), options)

    @prerequisites_required("abstraction", "store")
    def bound(self, config, cache, options):
        task = Task.load(options["task"])
        bundle = load_abstraction(config, cache)
        store = cache.load_store()
        selection = select(task, bundle.mdp, store)
        require_activated(selection, store)
        constants = compute_bound_constants(bundle.mdp, selection, store, bundle.model, bundle.gp)
        gap = optimality_gap_bound(constants, task.horizon)
        directory = self.output_dir(config, task)
        dump_bound_report(directory / "bound.json", constants, gap)
        self.stdout.write(
            "task %s: bound(0) = %.6g over %d safe cells" % (task.name, gap.bound(0), constants.safe_count)
        )

        refinement = options["oracle"]
        if refinement is None:
            return
        values = oracle_values(bundle.mdp, selection, store, bundle.model, bundle.gp, refinement)
        oracle_gap = values.gap(0)
        dump_json(
            directory / "oracle.json",
            {
                "refinement": refinement,
                "gap": oracle_gap,
                "bound": gap.bound(0),
                "within_bound": oracle_gap <= gap.bound(0),
            },
        )
        self.stdout.write("task %s: oracle gap(0) = %.6g at refinement %d" % (task.name, oracle_gap, refinement))
