import logging
from typing import Dict, FrozenSet, Iterable

from geometry.grid import Grid, discretize, double_outline, rebuild_without
from geometry.world import Coordinate, Workspace, destroy_obstacle

from .exceptions import CapabilityDenied

logger = logging.getLogger(__name__)


class SharedWorld:
    """
    Workspace plus the outlined grid every agent plans on. Grids for the
    real state and for hypothetical states (some obstacles assumed gone)
    are derived from the initial grid and cached per destroyed-id set.
    """

    def __init__(self, workspace: Workspace, res: float):
        self.workspace = workspace
        self.res = res
        self._initially_destroyed = self.destroyed_ids()
        self._base = double_outline(discretize(workspace, res))
        self._grids: Dict[FrozenSet[int], Grid] = {frozenset(): self._base}
        self.positions: Dict[int, Coordinate] = {a.id: a.position for a in workspace.agents}

    def destroyed_ids(self) -> FrozenSet[int]:
        return frozenset(o.id for o in self.workspace.obstacles if o.destroyed)

    def grid(self, assume_destroyed: Iterable[int] = ()) -> Grid:
        gone = (self.destroyed_ids() | frozenset(assume_destroyed)) - self._initially_destroyed
        if gone not in self._grids:
            self._grids[gone] = rebuild_without(self._base, gone)
        return self._grids[gone]

    def destroy(self, agent_id: int, obstacle_id: int):
        if not self.workspace.can_destroy(agent_id, obstacle_id):
            raise CapabilityDenied(agent_id, obstacle_id)
        destroy_obstacle(self.workspace, obstacle_id)

    def move(self, agent_id: int, point: Coordinate):
        self.positions[agent_id] = (float(point[0]), float(point[1]))
