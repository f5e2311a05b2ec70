#!/usr/bin/env python
"""
Relocation simulator command line.

    python manage.py validate scenarios/fixtures/fig1.scn
    python manage.py run scenarios/fixtures/fig1.scn --trace passage.trc --svg passage.svg
    python manage.py plan scenarios/fixtures/fig1.scn --agent 2
    python manage.py render passage.trc --svg passage.svg
    python manage.py test

Simulator commands exit with 0 (success or valid input), 1 (planning
failure) or 2 (input error).
"""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "backend.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the pinned stack with "
            "`pip install -r requirements.txt` inside a virtual environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
