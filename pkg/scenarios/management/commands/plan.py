import json

from django.core.management.base import BaseCommand, CommandError

from pathplanning.exceptions import StartBlocked
from pathplanning.planner import plan
from scenarios.cli import EXIT_FAILURE, EXIT_INPUT_ERROR

from ._shared import load_for_command


class Command(BaseCommand):
    help = "Plans one agent's route to its goal place on the path-planning layer only"

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Path to a .scn file')
        parser.add_argument('--agent', type=int, required=True, help='Agent id')

    def handle(self, *args, **options):
        scenario = load_for_command(options['scenario'])
        world, minds = scenario.build()
        mind = next((m for m in minds if m.agent_id == options['agent']), None)
        if mind is None:
            raise CommandError(f"No agent {options['agent']} in {scenario.name}", returncode=EXIT_INPUT_ERROR)

        grid = world.grid()
        try:
            start = grid.cell_of(mind.position)
            result = plan(grid, world.workspace, start, mind.places[mind.goal_place], mind.alpha_m, mind.delta)
        except StartBlocked as exc:
            raise CommandError(f"Agent {mind.agent_id} cannot start: {exc}", returncode=EXIT_FAILURE)

        self.stdout.write(json.dumps(result.as_dict(), sort_keys=True))
        if result.kind != "success":
            raise CommandError(f"Agent {mind.agent_id}: {result.kind}", returncode=EXIT_FAILURE)
