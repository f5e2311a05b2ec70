"""
Two-phase path planning: any-angle first, angle-constrained second.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Union

from geometry.grid import Cell, Grid
from geometry.world import Workspace

from .blocking import identify_blocking_obstacle
from .exceptions import NoCandidate
from .goals import resolve_goal_area
from .paths import GoalArea, Path
from .search import lian, theta_star

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Success:
    path: Path
    kind = "success"

    def as_dict(self):
        return {"kind": self.kind, "path": self.path.as_dict()}


@dataclass(frozen=True)
class AngleInfeasible:
    any_angle_path: Path
    kind = "angle-infeasible"

    def as_dict(self):
        return {"kind": self.kind, "any_angle_path": self.any_angle_path.as_dict()}


@dataclass(frozen=True)
class Blocked:
    obstacle_id: int
    obstacle_coords: tuple
    kind = "blocked"

    def __post_init__(self):
        object.__setattr__(
            self, "obstacle_coords", tuple((float(x), float(y)) for x, y in self.obstacle_coords)
        )

    def as_dict(self):
        return {
            "kind": self.kind,
            "obstacle_id": self.obstacle_id,
            "obstacle_coords": [list(p) for p in self.obstacle_coords],
        }


@dataclass(frozen=True)
class GoalAreaInvalid:
    kind = "goal-area-invalid"

    def as_dict(self):
        return {"kind": self.kind}


PlanResult = Union[Success, AngleInfeasible, Blocked, GoalAreaInvalid]


def plan_to_cells(grid: Grid, workspace: Workspace, start: Cell, goal_cells: Iterable[Cell],
                  alpha_m: float, delta: int) -> PlanResult:
    """The plan pipeline for an already resolved set of goal cells"""
    goals: FrozenSet[Cell] = frozenset(goal_cells)
    if not goals:
        return GoalAreaInvalid()

    any_angle = theta_star(grid, start, goals)
    if any_angle is None:
        try:
            blocking = identify_blocking_obstacle(grid, workspace, start, goals)
        except NoCandidate as exc:
            logger.warning("Goal unreachable and nothing to remove: %s", exc)
            return GoalAreaInvalid()
        return Blocked(blocking.obstacle_id, blocking.coordinates)

    constrained = lian(grid, start, goals, alpha_m, delta)
    if constrained is None:
        logger.info("Angle constraint %s too strict from %s", alpha_m, start)
        return AngleInfeasible(any_angle)
    return Success(constrained)


def plan(grid: Grid, workspace: Workspace, start: Cell, goal: GoalArea,
         alpha_m: float, delta: int) -> PlanResult:
    """
    Resolve the goal area, search for an any-angle path and, if one exists,
    for an angle-constrained path.

    Returns:
        GoalAreaInvalid when no goal cell is traversable, Blocked with the
        obstacle to remove when no path exists at all, AngleInfeasible with
        the any-angle path when only the angle constraint fails, otherwise
        Success.
    """
    result = plan_to_cells(grid, workspace, start, resolve_goal_area(grid, goal), alpha_m, delta)
    logger.debug("Plan from %s to %s: %s", start, goal, result.kind)
    return result

