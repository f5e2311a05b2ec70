from django.core.management.base import BaseCommand

from ._shared import load_for_command


class Command(BaseCommand):
    help = 'Checks a scenario file and reports every diagnostic with its position'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Path to a .scn file')

    def handle(self, *args, **options):
        scenario = load_for_command(options['scenario'])
        self.stdout.write(self.style.SUCCESS(
            f"{options['scenario']}: valid ({len(scenario.agents)} agents)"
        ))
