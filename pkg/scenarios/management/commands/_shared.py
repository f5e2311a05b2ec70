from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from scenarios.cli import EXIT_INPUT_ERROR
from scenarios.exceptions import ScenarioError
from scenarios.loader import Scenario, load_scenario


def output_path(path) -> Path:
    """Relative output paths land in RELOCATION["OUTPUT_DIR"]"""
    path = Path(path)
    if path.is_absolute():
        return path
    return Path(settings.RELOCATION["OUTPUT_DIR"]) / path


def load_for_command(path) -> Scenario:
    try:
        return load_scenario(path)
    except OSError as exc:
        raise CommandError(f"Cannot read scenario: {exc}", returncode=EXIT_INPUT_ERROR)
    except ScenarioError as exc:
        raise CommandError(str(exc), returncode=EXIT_INPUT_ERROR)
