from django.core.management.base import BaseCommand, CommandError

from scenarios.cli import EXIT_INPUT_ERROR
from scenarios.exceptions import TraceFormatError
from scenarios.rendering import render_trace
from scenarios.trace import read_trace

from ._shared import output_path


class Command(BaseCommand):
    help = 'Redraws the final state of a saved trace as SVG'

    def add_arguments(self, parser):
        parser.add_argument('trace', help='Trace file written by run --trace')
        parser.add_argument('--svg', required=True, help='Output SVG path')

    def handle(self, *args, **options):
        try:
            events = read_trace(options['trace'])
            svg = render_trace(events)
        except OSError as exc:
            raise CommandError(f"Cannot read trace: {exc}", returncode=EXIT_INPUT_ERROR)
        except TraceFormatError as exc:
            raise CommandError(f"{options['trace']}: {exc}", returncode=EXIT_INPUT_ERROR)
        path = output_path(options['svg'])
        path.write_text(svg, encoding='utf-8')
        self.stdout.write(self.style.SUCCESS(f'SVG written to {path}'))
