"""
Command-line entry point.

    relocation run <scenario> [--trace PATH] [--svg PATH]
    relocation plan <scenario> --agent ID
    relocation validate <scenario>
    relocation render <trace> --svg PATH

Exit codes: 0 success or valid input, 1 planning failure, 2 input error.
"""
import os
import sys
from typing import Optional, Sequence

import django
from django.core.management import call_command
from django.core.management.base import CommandError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2

SUBCOMMANDS = ("run", "plan", "validate", "render")


def cli_main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "backend.settings")
    django.setup()

    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv or argv[0] not in SUBCOMMANDS:
        stderr.write(f"usage: relocation {{{','.join(SUBCOMMANDS)}}} ...\n")
        return EXIT_INPUT_ERROR
    try:
        call_command(argv[0], *argv[1:], stdout=stdout, stderr=stderr)
    except CommandError as exc:
        stderr.write(f"{exc}\n")
        # argparse rejections come back as plain CommandErrors
        if str(exc).startswith("Error: "):
            return EXIT_INPUT_ERROR
        return exc.returncode
    return EXIT_OK
