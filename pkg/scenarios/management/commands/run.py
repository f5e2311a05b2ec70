from django.core.management.base import BaseCommand, CommandError

from coalition.exceptions import CoalitionError, TickCapExceeded
from coalition.runtime import run_coalition
from scenarios.cli import EXIT_FAILURE
from scenarios.rendering import render_trace
from scenarios.trace import write_trace

from ._shared import load_for_command, output_path


class Command(BaseCommand):
    help = 'Runs a scenario until the coalition succeeds or gets stuck'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Path to a .scn file')
        parser.add_argument('--trace', help='Write the event trace (one JSON record per line)')
        parser.add_argument('--svg', help='Write an SVG picture of the final state')

    def handle(self, *args, **options):
        scenario = load_for_command(options['scenario'])
        try:
            run = run_coalition(scenario)
        except TickCapExceeded as exc:
            run = exc.run
        except CoalitionError as exc:
            raise CommandError(f"{scenario.name}: {exc}", returncode=EXIT_FAILURE)
        self.save(run.trace, options)

        summary = f"{scenario.name}: {run.status} after {run.ticks} ticks"
        if not run.succeeded:
            detail = f" [{run.reason}]" if run.reason else ""
            if run.obstacle_id is not None:
                detail += f" obstacle {run.obstacle_id}"
            raise CommandError(summary + detail, returncode=EXIT_FAILURE)
        self.stdout.write(self.style.SUCCESS(summary))

    def save(self, events, options):
        if options['trace']:
            path = output_path(options['trace'])
            write_trace(path, events)
            self.stdout.write(f'Trace written to {path}')
        if options['svg']:
            path = output_path(options['svg'])
            path.write_text(render_trace(events), encoding='utf-8')
            self.stdout.write(f'SVG written to {path}')
