from safecompose.apps.pipeline.management.base import TaskCommand
from safecompose.apps.pipeline.stages import initial_states, load_abstraction, make_executor, run_rollouts
from safecompose.apps.runtime.execution import DISTURBANCE_MODES
from safecompose.apps.runtime.plotting import plot_rollouts
from safecompose.apps.runtime.reports import write_run_report, write_trajectory_csv
from safecompose.apps.runtime.stats import TaskBatch, dump_summary
from safecompose.apps.selection.reach_avoid import Task
from safecompose.apps.selection.selection import select
from safecompose.core.decorators import prerequisites_required, raises_command_error


class Command(TaskCommand):
    help = (
        "Execute the composed controller on the true system from x0 or from sampled "
        "safe initial states, training missing networks online"
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        start = parser.add_mutually_exclusive_group()
        start.add_argument("--x0", nargs="+", type=float, default=None, help="initial state")
        start.add_argument("--sample", type=int, default=None, help="number of sampled initial states")
        parser.add_argument("--mode", choices=DISTURBANCE_MODES, default=None, help="disturbance injected per step")
        parser.add_argument("--plot", action="store_true", help="write an SVG of the rollouts")

    @raises_command_error
    def handle(self, *args, **options):
        config = self.load_config(options)
        self.execute_task(config, self.load_cache(config), options)

    @prerequisites_required("abstraction", "store")
    def execute_task(self, config, cache, options):
        task = Task.load(options["task"])
        bundle = load_abstraction(config, cache)
        store = cache.load_store()
        selection = select(task, bundle.mdp, store)
        states = initial_states(config, selection, bundle.mdp.partition, x0=options["x0"], count=options["sample"])
        executor = make_executor(config, bundle, store)
        reports = run_rollouts(config, bundle, selection, executor, states, mode=options["mode"])
        if executor.events:
            cache.save_store(store)

        directory = self.output_dir(config, task)
        write_run_report(directory / "run.json", reports, selection)
        for index, report in enumerate(reports):
            write_trajectory_csv(directory / "trajectories" / ("rollout-%04d.csv" % index), report)
        dump_summary(directory / "summary.json", [TaskBatch(task.name, reports, selection.seconds)])
        if options["plot"]:
            plot_rollouts(directory / "rollouts.svg", task, reports, bundle.mdp.partition.domain)

        self.stdout.write(
            "task %s: %d rollouts, %d reached the goal, %d violations, %d networks trained online; wrote %s"
            % (
                task.name,
                len(reports),
                sum(r.reached_goal for r in reports),
                sum(r.safety_violation for r in reports),
                len(executor.events),
                directory,
            )
        )
