import logging
import math
from typing import FrozenSet

from geometry.grid import Cell, Grid

from .paths import GoalArea

logger = logging.getLogger(__name__)


def _ring(center: Cell, k: int):
    ci, cj = center
    if k == 0:
        yield center
        return
    for i in range(ci - k, ci + k + 1):
        for j in range(cj - k, cj + k + 1):
            if max(abs(i - ci), abs(j - cj)) == k:
                yield (i, j)


def resolve_goal_area(grid: Grid, goal: GoalArea) -> FrozenSet[Cell]:
    """
    Traversable cells whose centers lie within r_g of cp.

    When the disc holds no traversable cell the search widens ring by ring
    around cp's cell and returns the first ring with traversable cells. An
    empty result means the whole grid is blocked.
    """
    res = grid.res
    cx, cy = goal.cp
    reach = int(math.ceil(goal.r_g / res)) + 1
    center = grid.cell_of(goal.cp)

    cells = set()
    for i in range(center[0] - reach, center[0] + reach + 1):
        for j in range(center[1] - reach, center[1] + reach + 1):
            if not grid.in_bounds((i, j)) or not grid.traversable((i, j)):
                continue
            x, y = grid.cell_center((i, j))
            if math.hypot(x - cx, y - cy) <= goal.r_g + 1e-9:
                cells.add((i, j))
    if cells:
        return frozenset(cells)

    for k in range(max(grid.width, grid.height) + 1):
        ring = {c for c in _ring(center, k) if grid.in_bounds(c) and grid.traversable(c)}
        if ring:
            logger.debug("Goal area %s widened to ring %s around %s", goal, k, center)
            return frozenset(ring)

    logger.warning("Goal area %s has no traversable cell on the grid", goal)
    return frozenset()
