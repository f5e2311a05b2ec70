class PathPlanningError(Exception):
    """Base class for search failures that are not plain 'no path'"""


class StartBlocked(PathPlanningError):
    def __init__(self, cell):
        super().__init__(f"Start cell {cell} is not traversable")
        self.cell = cell


class NoCandidate(PathPlanningError):
    """The reachable region borders no obstacle"""


class InvalidPlanningParameter(PathPlanningError, ValueError):
    """Goal radius or search parameter outside its allowed range"""
